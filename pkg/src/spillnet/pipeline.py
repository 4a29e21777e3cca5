"""End-to-end orchestration: describe -> estimate -> network -> diffusion
-> blocks per period, plus the four-period pattern-shift comparison.

Pairwise fits run on a thread pool (the likelihood kernel releases the
GIL); every merge point is ordered by node index, so output files are
byte-identical for any parallelism degree. All artifacts go under one
directory per period with fixed file names; nothing written contains
timestamps.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import blockmodel, diffusion
from .bekk import BekkFit, FitOptions, SpilloverTest, directional_tests, fit_bekk
from .config import COMPARISON_PERIODS, RunConfig
from .diagnostics import describe_panel, two_sample_t
from .diffusion import CumulativeCurve, PatternShift, cumulative_distribution, pattern_shift
from .errors import MissingPeriod, SpillnetError, TooFewNodes, ZeroLockdownShift
from .network import (
    SpilloverNetwork,
    build_network,
    to_dot,
    topology,
    weighted_edge_cumulative,
)
from .panel import SeriesPanel, first_difference, load_panel, slice_period

logger = logging.getLogger(__name__)

DIAGNOSTICS_CSV = "diagnostics.csv"
PAIRWISE_CSV = "pairwise.csv"
PAIRWISE_JSON = "pairwise.json"
ADJACENCY_CSV = "network_adjacency.csv"
NETWORK_DOT = "network.dot"
TOPOLOGY_JSON = "topology.json"
EDGE_CURVE_CSV = "edge_cumulative.csv"
EDGE_CURVE_SVG = "edge_cumulative.svg"
DIFFUSION_CSV = "diffusion_indices.csv"
CURVE_OUT_CSV = "diffusion_curve_out.csv"
CURVE_IN_CSV = "diffusion_curve_in.csv"
BLOCKS_CSV = "blocks.csv"
BLOCK_DENSITY_CSV = "block_density.csv"
BLOCK_IMAGE_CSV = "block_image.csv"
BLOCKS_DOT = "blocks.dot"
COMPARISON_JSON = "comparison.json"
COMPARISON_SVG = "diffusion_comparison_{direction}.svg"
RUN_JSON = "run.json"

PAIRWISE_HEADER = (
    "from", "to", "a_off", "b_off", "weight", "wald_stat", "p", "converged", "status",
)
DIAGNOSTICS_HEADER = (
    "node", "mean", "std_dev", "skewness", "kurtosis",
    "jb_stat", "jb_p", "lb_stat", "lb_p",
    "arch_lm_stat", "arch_lm_p", "adf_stat", "adf_p", "adf_lag",
)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{x:.12g}" if np.isfinite(x) else ""
    return str(x)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(cell) for cell in row) + "\n")


def _write_json(path, payload) -> None:
    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [clean(v) for v in obj]
        if isinstance(obj, (np.floating, np.integer)):
            obj = obj.item()
        if isinstance(obj, float) and not np.isfinite(obj):
            return None
        return obj

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(clean(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_text(path, text) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_svg(path, series, title, xlabel, ylabel) -> None:
    """Deterministic SVG line plot (fixed hash salt, no date metadata)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with plt.rc_context({"svg.hashsalt": "spillnet"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for label, x, y in series:
            ax.plot(x, y, marker="o", markersize=3, label=label)
        ax.set_title(title)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if len(series) > 1:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


# --- estimation stage --------------------------------------------------------

@dataclass(frozen=True)
class PairResult:
    i: int
    j: int
    fit: BekkFit


def estimate_pairs(
    panel: SeriesPanel,
    opts: FitOptions,
    jobs: int = 1,
) -> tuple[list[PairResult], list[SpilloverTest]]:
    """Fit every unordered column pair and derive both directional tests.

    Pairs are processed as a work queue but collected in lexicographic
    (i, j) order, so results do not depend on the parallelism degree.
    """
    values = panel.values
    pairs = [
        (i, j)
        for i in range(panel.n_nodes)
        for j in range(i + 1, panel.n_nodes)
    ]

    def fit_one(pair):
        i, j = pair
        try:
            return PairResult(i, j, fit_bekk(values[:, [i, j]], opts))
        except SpillnetError as exc:
            raise type(exc)(
                f"pair ({panel.node_ids[i]}, {panel.node_ids[j]}): {exc}"
            ) from exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(fit_one, pairs))
    else:
        results = [fit_one(pair) for pair in pairs]

    tests: list[SpilloverTest] = []
    for res in results:
        labels = (panel.node_ids[res.i], panel.node_ids[res.j])
        tests.extend(directional_tests(res.fit, labels))
    tests.sort(key=lambda t: (t.from_node, t.to_node))
    return results, tests


# --- per-period analysis -----------------------------------------------------

@dataclass
class PeriodReport:
    name: str
    panel: SeriesPanel
    results: list[PairResult]
    tests: list[SpilloverTest]
    net: SpilloverNetwork
    curves: dict[str, CumulativeCurve | None]

    @property
    def n_fits(self) -> int:
        return len(self.results)


def analyze_period(panel: SeriesPanel, config: RunConfig, name: str = "") -> PeriodReport:
    opts = FitOptions(
        max_iter=config.max_iterations,
        grad_tol=config.gradient_tol,
        restart_seed=config.seed,
    )
    results, tests = estimate_pairs(panel, opts, config.jobs)
    net = build_network(tests, list(panel.node_ids), config.alpha)
    profile = diffusion.diffusion_profile(net)
    curves: dict[str, CumulativeCurve | None] = {}
    for direction, indices in (("out", profile.local_out), ("in", profile.local_in)):
        try:
            curves[direction] = cumulative_distribution(indices, config.bins)
        except TooFewNodes as exc:
            logger.warning("%s: %s-direction curve unavailable: %s", name, direction, exc)
            curves[direction] = None
    return PeriodReport(name, panel, results, tests, net, curves)


# --- artifact writers ---------------------------------------------------------

def write_diagnostics(out_dir: str, panel: SeriesPanel) -> None:
    diag = describe_panel(panel)
    _write_csv(
        os.path.join(out_dir, DIAGNOSTICS_CSV),
        DIAGNOSTICS_HEADER,
        (
            (
                node, d.mean, d.std_dev, d.skewness, d.kurtosis,
                d.jb_stat, d.jb_p, d.lb_stat, d.lb_p,
                d.arch_lm_stat, d.arch_lm_p, d.adf_stat, d.adf_p, d.adf_lag,
            )
            for node, d in diag.items()
        ),
    )


def _pairwise_rows(report: PeriodReport):
    node_ids = report.panel.node_ids
    converged = {}
    offdiag = {}
    for res in report.results:
        a, b = node_ids[res.i], node_ids[res.j]
        converged[(a, b)] = converged[(b, a)] = res.fit.converged
        theta = res.fit.params.to_theta()
        offdiag[(a, b)] = (theta[10], theta[14])  # a12, b12 transmit column i -> j
        offdiag[(b, a)] = (theta[11], theta[15])
    for t in report.tests:
        a_off, b_off = offdiag[(t.from_node, t.to_node)]
        yield (
            t.from_node, t.to_node, a_off, b_off, t.weight,
            t.wald_stat, t.p_value, converged[(t.from_node, t.to_node)], t.status,
        )


def write_pairwise(out_dir: str, report: PeriodReport) -> None:
    rows = list(_pairwise_rows(report))
    _write_csv(os.path.join(out_dir, PAIRWISE_CSV), PAIRWISE_HEADER, rows)
    _write_json(
        os.path.join(out_dir, PAIRWISE_JSON),
        [dict(zip(PAIRWISE_HEADER, row)) for row in rows],
    )


def write_network(out_dir: str, report: PeriodReport, config: RunConfig) -> dict:
    net = report.net
    _write_csv(
        os.path.join(out_dir, ADJACENCY_CSV),
        ("node",) + net.node_ids,
        ((net.node_ids[i],) + tuple(net.weights[i]) for i in range(net.n_nodes)),
    )
    _write_text(os.path.join(out_dir, NETWORK_DOT), to_dot(net))
    topo = topology(net)
    payload = {
        "nd": topo.nd, "ne": topo.ne, "nc": topo.nc, "nh": topo.nh,
        "edge_count": topo.edge_count,
    }
    _write_json(os.path.join(out_dir, TOPOLOGY_JSON), payload)
    if net.edge_count > 0:
        curve = weighted_edge_cumulative(net)
        _write_csv(
            os.path.join(out_dir, EDGE_CURVE_CSV),
            ("rank_fraction", "cumulative_weight_share"),
            curve,
        )
        if config.svg:
            _write_svg(
                os.path.join(out_dir, EDGE_CURVE_SVG),
                [("edges", [p[0] for p in curve], [p[1] for p in curve])],
                "Cumulative weight share of ranked edges",
                "weight-rank fraction",
                "cumulative share",
            )
    else:
        logger.warning("period %s: empty network, no edge curve", report.name)
    return payload


def write_diffusion(out_dir: str, report: PeriodReport) -> None:
    profile = diffusion.diffusion_profile(report.net)
    _write_csv(
        os.path.join(out_dir, DIFFUSION_CSV),
        ("node", "d_out", "d_in", "ld_out", "ld_in"),
        (
            (
                node,
                profile.out_strength[k], profile.in_strength[k],
                profile.local_out[k], profile.local_in[k],
            )
            for k, node in enumerate(report.net.node_ids)
        ),
    )
    for direction, fname in (("out", CURVE_OUT_CSV), ("in", CURVE_IN_CSV)):
        curve = report.curves[direction]
        if curve is not None:
            _write_csv(
                os.path.join(out_dir, fname),
                ("bin_midpoint", "cumulative_proportion"),
                zip(curve.bin_midpoints, curve.cumulative_proportion),
            )


def write_blocks(out_dir: str, report: PeriodReport) -> dict | None:
    net = report.net
    if net.n_nodes < 4:
        logger.warning("period %s: fewer than 4 nodes, skipping block model", report.name)
        return None
    partition = blockmodel.analyze_blocks(net)
    stats = blockmodel.block_stats(net, partition.assignment)
    _write_csv(
        os.path.join(out_dir, BLOCKS_CSV),
        (
            "block", "size", "members", "received_inside", "received_outside",
            "sent_inside", "sent_outside",
            "expected_internal_ratio_pct", "actual_internal_ratio_pct", "role",
        ),
        (
            (
                k,
                stats.blocks[k].size,
                ";".join(node for node, blk in partition.assignment.items() if blk == k),
                stats.blocks[k].received_inside,
                stats.blocks[k].received_outside,
                stats.blocks[k].sent_inside,
                stats.blocks[k].sent_outside,
                100.0 * stats.blocks[k].expected_internal_ratio,
                100.0 * stats.blocks[k].actual_internal_ratio,
                partition.roles[k - 1],
            )
            for k in sorted(stats.blocks)
        ),
    )
    names = tuple(f"block{k}" for k in range(1, len(partition.block_sizes) + 1))
    _write_csv(
        os.path.join(out_dir, BLOCK_DENSITY_CSV),
        ("block",) + names,
        ((names[r],) + tuple(partition.density_matrix[r]) for r in range(len(names))),
    )
    _write_csv(
        os.path.join(out_dir, BLOCK_IMAGE_CSV),
        ("block",) + names,
        ((names[r],) + tuple(int(v) for v in partition.image_matrix[r]) for r in range(len(names))),
    )
    _write_text(os.path.join(out_dir, BLOCKS_DOT), blockmodel.blocks_to_dot(partition))
    return {"sizes": list(partition.block_sizes), "roles": list(partition.roles)}


# --- comparison ----------------------------------------------------------------

def compare_periods(
    curves_by_period: dict[str, dict[str, CumulativeCurve | None]],
) -> dict[str, PatternShift]:
    """Pattern shift per direction across the four named periods.

    Expects lockdown, recovery, normal-lockdown and normal-recovery keys,
    each mapping direction ("out"/"in") to its cumulative curve. The
    rebound ratio is None when the lockdown shift is zero.
    """
    missing = [p for p in COMPARISON_PERIODS if p not in curves_by_period]
    if missing:
        raise MissingPeriod(f"comparison needs periods {missing}")
    shifts: dict[str, PatternShift] = {}
    for direction in ("out", "in"):
        curves = {p: curves_by_period[p].get(direction) for p in COMPARISON_PERIODS}
        undefined = [p for p, c in curves.items() if c is None]
        if undefined:
            raise MissingPeriod(
                f"{direction}-direction curves undefined for periods {undefined}"
            )
        s_lock = pattern_shift(curves["lockdown"], curves["normal-lockdown"])
        s_rec = pattern_shift(curves["recovery"], curves["normal-recovery"])
        try:
            rebound = diffusion.resilience(s_lock, s_rec)
        except ZeroLockdownShift:
            logger.warning("%s direction: zero lockdown shift, rebound undefined", direction)
            rebound = None
        shifts[direction] = PatternShift(s_lock, s_rec, rebound)
    return shifts


# --- entry points ----------------------------------------------------------------

def load_configured_panel(config: RunConfig) -> SeriesPanel:
    node_columns = list(config.node_columns) if config.node_columns else None
    return load_panel(
        config.require_input(),
        date_column=config.date_column,
        node_columns=node_columns,
        gap_fill=config.gap_fill,
    )


def prepare_period_panel(panel: SeriesPanel, spec, config: RunConfig) -> SeriesPanel:
    sliced = slice_period(panel, spec)
    return first_difference(sliced) if config.difference else sliced


def _foreach_period(config: RunConfig, stage) -> None:
    """Run one analysis stage per configured period (standalone subcommands)."""
    panel = load_configured_panel(config)
    os.makedirs(config.out, exist_ok=True)
    for spec in config.require_periods():
        period_panel = prepare_period_panel(panel, spec, config)
        report = analyze_period(period_panel, config, spec.name)
        out_dir = os.path.join(config.out, spec.name)
        os.makedirs(out_dir, exist_ok=True)
        stage(report, out_dir)


def run_pipeline(config: RunConfig) -> dict:
    """Run every stage for every configured period; returns the run report."""
    panel = load_configured_panel(config)
    periods = config.require_periods()
    os.makedirs(config.out, exist_ok=True)

    report: dict = {
        "alpha": config.alpha,
        "bins": config.bins,
        "seed": config.seed,
        "jobs_requested": config.jobs,
        "nodes": list(panel.node_ids),
        "periods": {},
    }
    curves_by_period: dict[str, dict[str, CumulativeCurve | None]] = {}
    for spec in periods:
        logger.info("analyzing period %s (%s..%s)", spec.name, spec.start, spec.end)
        period_panel = prepare_period_panel(panel, spec, config)
        period = analyze_period(period_panel, config, spec.name)
        out_dir = os.path.join(config.out, spec.name)
        os.makedirs(out_dir, exist_ok=True)
        write_diagnostics(out_dir, period_panel)
        write_pairwise(out_dir, period)
        topo = write_network(out_dir, period, config)
        write_diffusion(out_dir, period)
        blocks = write_blocks(out_dir, period)
        report["periods"][spec.name] = {
            "rows": period_panel.n_obs,
            "fits": period.n_fits,
            "directional_tests": len(period.tests),
            "topology": topo,
            "blocks": blocks,
        }
        curves_by_period[spec.name] = period.curves

    if all(p in curves_by_period for p in COMPARISON_PERIODS):
        try:
            shifts = compare_periods(curves_by_period)
        except MissingPeriod as exc:
            logger.warning("comparison skipped: %s", exc)
        else:
            payload = {
                direction: {
                    "s_lockdown": shift.s_lockdown,
                    "s_recovery": shift.s_recovery,
                    "resilience": shift.resilience,
                }
                for direction, shift in shifts.items()
            }
            _write_json(os.path.join(config.out, COMPARISON_JSON), payload)
            report["comparison"] = payload
            if config.svg:
                for direction in ("out", "in"):
                    series = [
                        (
                            period,
                            curves_by_period[period][direction].bin_midpoints,
                            curves_by_period[period][direction].cumulative_proportion,
                        )
                        for period in COMPARISON_PERIODS
                    ]
                    _write_svg(
                        os.path.join(config.out, COMPARISON_SVG.format(direction=direction)),
                        series,
                        f"Cumulative local {direction}-spillover by period",
                        f"local {direction}-spillover index",
                        "cumulative node share",
                    )

    _write_json(os.path.join(config.out, RUN_JSON), report)
    return report


def run_describe(config: RunConfig, ttest: str | None = None) -> None:
    """describe subcommand: per-period diagnostics CSV, optional Welch t."""
    panel = load_configured_panel(config)
    os.makedirs(config.out, exist_ok=True)
    for spec in config.require_periods():
        period_panel = prepare_period_panel(panel, spec, config)
        out_dir = os.path.join(config.out, spec.name)
        os.makedirs(out_dir, exist_ok=True)
        write_diagnostics(out_dir, period_panel)
    if ttest:
        if ":" not in ttest:
            raise SpillnetError(f"--ttest wants PERIOD_A:PERIOD_B, got {ttest!r}")
        name_a, name_b = ttest.split(":", 1)
        by_name = {p.name: p for p in config.require_periods()}
        for name in (name_a, name_b):
            if name not in by_name:
                raise MissingPeriod(f"--ttest period {name!r} not configured")
        panel_a = prepare_period_panel(panel, by_name[name_a], config)
        panel_b = prepare_period_panel(panel, by_name[name_b], config)
        rows = [
            (node,) + two_sample_t(panel_a.column(node), panel_b.column(node))
            for node in panel.node_ids
        ]
        _write_csv(
            os.path.join(config.out, f"ttest_{name_a}_vs_{name_b}.csv"),
            ("node", "t_stat", "p"),
            rows,
        )


def run_estimate(config: RunConfig) -> None:
    _foreach_period(config, lambda report, out_dir: write_pairwise(out_dir, report))


def run_network(config: RunConfig) -> None:
    _foreach_period(config, lambda report, out_dir: write_network(out_dir, report, config))


def run_diffusion(config: RunConfig) -> None:
    _foreach_period(config, lambda report, out_dir: write_diffusion(out_dir, report))


def run_blocks(config: RunConfig) -> None:
    def stage(report, out_dir):
        if write_blocks(out_dir, report) is None:
            raise TooFewNodes("block model needs at least 4 nodes")

    _foreach_period(config, stage)
