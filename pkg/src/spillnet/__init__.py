"""Volatility-spillover network analysis.

Pairwise bivariate GARCH-BEKK(1,1) fits over a panel of daily series,
Wald-thresholded directed edge weights, network topology statistics,
local diffusion indices with pattern-shift/rebound scores, and CONCOR
block modeling, wrapped in a reproducible CLI pipeline.
"""

from .bekk import (
    BekkFit,
    BekkParams,
    FitOptions,
    SpilloverTest,
    fit_bekk,
    neg_loglik,
    wald_spillover,
)
from .blockmodel import (
    BlockPartition,
    BlockStats,
    analyze_blocks,
    block_stats,
    classify_block,
    concor_split,
    image_matrix,
)
from .config import RunConfig, load_config, parse_config_text
from .diagnostics import (
    SeriesDiagnostics,
    adf_test,
    arch_lm,
    describe_panel,
    describe_series,
    jarque_bera,
    ljung_box,
    two_sample_t,
)
from .diffusion import (
    CumulativeCurve,
    DiffusionProfile,
    PatternShift,
    cumulative_distribution,
    diffusion_profile,
    local_spillover_index,
    pattern_shift,
    resilience,
    spillover_strengths,
)
from .errors import SpillnetError
from .network import (
    NetworkTopology,
    SpilloverNetwork,
    build_network,
    global_efficiency,
    network_connectivity,
    network_density,
    network_hierarchy,
    topology,
    weighted_edge_cumulative,
)
from .panel import (
    PeriodSpec,
    SeriesPanel,
    first_difference,
    full_range,
    load_panel,
    panel_to_csv,
    slice_period,
)
from .pipeline import compare_periods, estimate_pairs, run_pipeline
from .simulate import SimSpec, pair_params, simulate_bekk, simulate_panel

__version__ = "0.1.0"

__all__ = [
    "BekkFit", "BekkParams", "FitOptions", "SpilloverTest",
    "fit_bekk", "neg_loglik", "wald_spillover",
    "BlockPartition", "BlockStats", "analyze_blocks", "block_stats",
    "classify_block", "concor_split", "image_matrix",
    "RunConfig", "load_config", "parse_config_text",
    "SeriesDiagnostics", "adf_test", "arch_lm", "describe_panel",
    "describe_series", "jarque_bera", "ljung_box", "two_sample_t",
    "CumulativeCurve", "DiffusionProfile", "PatternShift",
    "cumulative_distribution", "diffusion_profile", "local_spillover_index",
    "pattern_shift", "resilience", "spillover_strengths",
    "SpillnetError",
    "NetworkTopology", "SpilloverNetwork", "build_network",
    "global_efficiency", "network_connectivity", "network_density",
    "network_hierarchy", "topology", "weighted_edge_cumulative",
    "PeriodSpec", "SeriesPanel", "first_difference", "full_range",
    "load_panel", "panel_to_csv", "slice_period",
    "compare_periods", "estimate_pairs", "run_pipeline",
    "SimSpec", "pair_params", "simulate_bekk", "simulate_panel",
    "__version__",
]
