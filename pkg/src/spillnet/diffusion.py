"""Local spillover indices, cumulative curves, and pattern-shift scores.

A node's out-strength is its row sum of W; in-strength its column sum.
The local index divides a node's own strength by the summed same-direction
strength of its neighbours, where the neighbour set is the union of in-
and out-neighbours (presence in either direction of W > 0). Nodes whose
neighbour strengths sum to zero have no defined index and carry NaN; they
are excluded from the cumulative curves.

The pattern shift S between two cumulative curves is the L1 distance of
their monotone piecewise-linear interpolants over the intersection of
their x-domains (composite trapezoid on 1000 uniform points), and the
relative rebound R = (S_recovery - S_lockdown) / S_lockdown.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DisjointDomains, TooFewNodes, ZeroLockdownShift
from .network import SpilloverNetwork

PATTERN_SHIFT_GRID = 1000


@dataclass(frozen=True, eq=False)
class CumulativeCurve:
    """Cumulative node-share curve sampled at bin midpoints."""

    bin_midpoints: np.ndarray
    cumulative_proportion: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bin_midpoints", np.asarray(self.bin_midpoints, float))
        object.__setattr__(
            self, "cumulative_proportion", np.asarray(self.cumulative_proportion, float)
        )
        if self.bin_midpoints.shape != self.cumulative_proportion.shape:
            raise ValueError("x and y must have the same length")
        if self.bin_midpoints.size == 0:
            raise ValueError("curve needs at least one point")


@dataclass(frozen=True, eq=False)
class DiffusionProfile:
    """Per-node strengths and local indices for one network."""

    node_ids: tuple[str, ...]
    out_strength: np.ndarray
    in_strength: np.ndarray
    local_out: np.ndarray  # NaN where undefined
    local_in: np.ndarray


@dataclass(frozen=True)
class PatternShift:
    """Shift areas for the two pandemic periods plus the rebound ratio.

    resilience is None when the lockdown shift is zero (undefined ratio).
    """

    s_lockdown: float
    s_recovery: float
    resilience: float | None


def spillover_strengths(net: SpilloverNetwork) -> tuple[np.ndarray, np.ndarray]:
    """(row sums, column sums) of the weight matrix."""
    return net.weights.sum(axis=1), net.weights.sum(axis=0)


def local_spillover_index(net: SpilloverNetwork, direction: str) -> np.ndarray:
    """Own strength over summed neighbour strength, per node.

    direction is "out" or "in"; the neighbour set is direction-agnostic.
    Undefined entries (zero neighbour strength) are NaN.
    """
    if direction not in ("out", "in"):
        raise ValueError('direction must be "out" or "in"')
    d_out, d_in = spillover_strengths(net)
    own = d_out if direction == "out" else d_in
    adj = net.adjacency
    neighbours = adj | adj.T
    out = np.empty(net.n_nodes)
    for i in range(net.n_nodes):
        denom = own[neighbours[i]].sum()
        out[i] = own[i] / denom if denom > 0 else np.nan
    return out


def diffusion_profile(net: SpilloverNetwork) -> DiffusionProfile:
    d_out, d_in = spillover_strengths(net)
    return DiffusionProfile(
        node_ids=net.node_ids,
        out_strength=d_out,
        in_strength=d_in,
        local_out=local_spillover_index(net, "out"),
        local_in=local_spillover_index(net, "in"),
    )


def cumulative_distribution(indices: np.ndarray, bins: int = 10) -> CumulativeCurve:
    """Cumulative fraction of nodes per equal-width bin of the defined indices.

    x values are bin midpoints, y the fraction of defined indices at or
    below each bin's right edge; the last y is exactly 1. A degenerate
    range (all indices identical) collapses to a single point at y = 1.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    values = np.asarray(indices, dtype=float)
    values = values[np.isfinite(values)]
    if values.size < 2:
        raise TooFewNodes(f"need at least 2 defined indices, got {values.size}")
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        return CumulativeCurve(np.array([lo]), np.array([1.0]))
    edges = np.linspace(lo, hi, bins + 1)
    mids = (edges[:-1] + edges[1:]) / 2.0
    y = np.array([np.count_nonzero(values <= edge) / values.size for edge in edges[1:]])
    return CumulativeCurve(mids, y)


def pattern_shift(curve_a: CumulativeCurve, curve_b: CumulativeCurve) -> float:
    """L1 distance between the two interpolated curves on their shared
    x-range; symmetric in its arguments."""
    lo = max(curve_a.bin_midpoints[0], curve_b.bin_midpoints[0])
    hi = min(curve_a.bin_midpoints[-1], curve_b.bin_midpoints[-1])
    if lo > hi:
        raise DisjointDomains(f"curves share no x-range ({lo} > {hi})")
    grid = np.linspace(lo, hi, PATTERN_SHIFT_GRID)
    fa = np.interp(grid, curve_a.bin_midpoints, curve_a.cumulative_proportion)
    fb = np.interp(grid, curve_b.bin_midpoints, curve_b.cumulative_proportion)
    return float(np.trapezoid(np.abs(fa - fb), grid))


def resilience(s_lockdown: float, s_recovery: float) -> float:
    """Relative rebound (s_recovery - s_lockdown) / s_lockdown."""
    if not s_lockdown > 0:
        raise ZeroLockdownShift("lockdown shift must be positive")
    return (s_recovery - s_lockdown) / s_lockdown
