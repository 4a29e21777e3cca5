"""Directed weighted spillover network and its topology statistics.

Edges come from pairwise directional tests: W[i][j] is |a_off| + |b_off|
when the Wald p-value for i -> j clears the significance level, else 0.
The four topology summaries are computed on the unweighted digraph induced
by W > 0:

    density       ND = M / (N(N-1))
    efficiency    NE = mean over ordered pairs of 1 / hop-distance
                  (0 for unreachable pairs; Latora-Marchiori directed form)
    connectivity  NC = 1 - V / (N(N-1)/2), V = unordered pairs unreachable
                  in both directions
    hierarchy     NH = 1 - S / MAX(S), S = unordered pairs reachable in
                  both directions, MAX(S) = pairs reachable in at least
                  one; NH = 0 when MAX(S) = 0

Path lengths are hop counts; spillover weights are intensities, not
distances.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np

from .bekk import SpilloverTest
from .errors import EmptyNetwork, IncompletePairSet

logger = logging.getLogger(__name__)

UNREACHABLE = -1


@dataclass(frozen=True, eq=False)
class SpilloverNetwork:
    """Weighted digraph over named nodes; immutable after construction."""

    node_ids: tuple[str, ...]
    weights: np.ndarray  # N x N, zero diagonal, nonnegative
    significance_level: float = 0.05

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "node_ids", tuple(self.node_ids))
        object.__setattr__(self, "weights", w)
        n = len(self.node_ids)
        if w.shape != (n, n):
            raise ValueError(f"weights shape {w.shape} does not match {n} nodes")
        if n < 2:
            raise ValueError("network needs at least 2 nodes")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        if np.any(np.diag(w) != 0):
            raise ValueError("diagonal must be zero")
        w.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def adjacency(self) -> np.ndarray:
        return self.weights > 0

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(self.weights))


@dataclass(frozen=True)
class NetworkTopology:
    nd: float
    ne: float
    nc: float
    nh: float
    edge_count: int


def build_network(
    tests: list[SpilloverTest],
    nodes: list[str],
    alpha: float = 0.05,
) -> SpilloverNetwork:
    """Assemble W from the full ordered-pair test set.

    Every ordered pair must appear exactly once (N(N-1) directional tests
    from N(N-1)/2 pairwise fits). Directions flagged untestable or
    nonconverged contribute no edge and are logged.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    nodes = list(nodes)
    index = {node: k for k, node in enumerate(nodes)}
    n = len(nodes)
    by_pair: dict[tuple[int, int], SpilloverTest] = {}
    for test in tests:
        if test.from_node not in index or test.to_node not in index:
            raise IncompletePairSet(
                f"test references unknown node {test.from_node!r} or {test.to_node!r}"
            )
        key = (index[test.from_node], index[test.to_node])
        if key[0] == key[1]:
            raise IncompletePairSet(f"self-directed test for node {test.from_node!r}")
        if key in by_pair:
            raise IncompletePairSet(
                f"duplicate test for {test.from_node} -> {test.to_node}"
            )
        by_pair[key] = test
    missing = [
        (nodes[i], nodes[j])
        for i in range(n)
        for j in range(n)
        if i != j and (i, j) not in by_pair
    ]
    if missing:
        raise IncompletePairSet(f"missing {len(missing)} directional tests, e.g. {missing[:3]}")

    w = np.zeros((n, n))
    for (i, j), test in by_pair.items():
        if test.status != "ok":
            logger.warning(
                "direction %s -> %s is %s; treated as no edge",
                test.from_node, test.to_node, test.status,
            )
            continue
        if test.p_value < alpha:
            w[i, j] = test.weight
    return SpilloverNetwork(tuple(nodes), w, alpha)


def _hop_lengths(adj: np.ndarray) -> np.ndarray:
    """BFS hop distances between all ordered pairs; UNREACHABLE off-path."""
    n = adj.shape[0]
    out: list[list[int]] = [np.flatnonzero(adj[i]).tolist() for i in range(n)]
    dist = np.full((n, n), UNREACHABLE, dtype=np.int64)
    for src in range(n):
        dist[src, src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in out[u]:
                if dist[src, v] == UNREACHABLE:
                    dist[src, v] = dist[src, u] + 1
                    queue.append(v)
    return dist


def network_density(net: SpilloverNetwork) -> float:
    n = net.n_nodes
    return net.edge_count / (n * (n - 1))


def global_efficiency(net: SpilloverNetwork) -> float:
    n = net.n_nodes
    dist = _hop_lengths(net.adjacency)
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j and dist[i, j] != UNREACHABLE:
                total += 1.0 / dist[i, j]
    return total / (n * (n - 1))


def network_connectivity(net: SpilloverNetwork) -> float:
    n = net.n_nodes
    dist = _hop_lengths(net.adjacency)
    unreachable_pairs = 0
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] == UNREACHABLE and dist[j, i] == UNREACHABLE:
                unreachable_pairs += 1
    return 1.0 - unreachable_pairs / (n * (n - 1) / 2.0)


def network_hierarchy(net: SpilloverNetwork) -> float:
    n = net.n_nodes
    dist = _hop_lengths(net.adjacency)
    symmetric = 0
    reachable = 0
    for i in range(n):
        for j in range(i + 1, n):
            fwd = dist[i, j] != UNREACHABLE
            bwd = dist[j, i] != UNREACHABLE
            if fwd or bwd:
                reachable += 1
            if fwd and bwd:
                symmetric += 1
    if reachable == 0:
        return 0.0
    return 1.0 - symmetric / reachable


def topology(net: SpilloverNetwork) -> NetworkTopology:
    return NetworkTopology(
        nd=network_density(net),
        ne=global_efficiency(net),
        nc=network_connectivity(net),
        nh=network_hierarchy(net),
        edge_count=net.edge_count,
    )


def weighted_edge_cumulative(net: SpilloverNetwork) -> list[tuple[float, float]]:
    """Cumulative weight share against weight-rank fraction.

    Edges sorted by descending weight (ties broken by node indices so the
    curve is stable); point k is (k/M, share of total weight carried by
    the top k edges). Ends at exactly (1.0, 1.0).
    """
    w = net.weights
    edges = [
        (w[i, j], i, j)
        for i in range(net.n_nodes)
        for j in range(net.n_nodes)
        if w[i, j] > 0
    ]
    if not edges:
        raise EmptyNetwork("cumulative edge curve needs at least one edge")
    edges.sort(key=lambda e: (-e[0], e[1], e[2]))
    weights = np.array([e[0] for e in edges])
    shares = np.cumsum(weights)
    shares /= shares[-1]
    m = len(edges)
    return [((k + 1) / m, float(shares[k])) for k in range(m)]


def to_dot(net: SpilloverNetwork, precision: int = 4) -> str:
    """Graphviz rendering with weight-labelled directed edges."""
    lines = ["digraph spillover {"]
    for node in net.node_ids:
        lines.append(f'  "{node}";')
    for i, frm in enumerate(net.node_ids):
        for j, to in enumerate(net.node_ids):
            wij = net.weights[i, j]
            if wij > 0:
                lines.append(f'  "{frm}" -> "{to}" [label="{wij:.{precision}f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
