"""Nonparametric multiple change point detection for multivariate series.

The detector scans a moving window pair across the series and scores the
kernel discrepancy between the joint laws of (X_t, X_{t+lag}) left and
right of each position, so changes in the marginal distribution and in
the serial dependence at chosen lags are both visible.  Thresholds come
from a dependent multiplier bootstrap; estimates found at several lags
(or bandwidths) are merged into one segmentation.
"""

from .bootstrap import (
    BootstrapConfig,
    BootstrapResult,
    bootstrap_replicate,
    default_block_scale,
    generate_multipliers,
    importance_score,
    run_bootstrap,
    threshold_rank,
)
from .detector import (
    DetectorProfile,
    LaggedSeries,
    TimeSeries,
    detector_profile,
    direct_detector,
    make_lagged,
)
from .kernels import (
    DegenerateScale,
    KernelSpec,
    auto_scale,
    eval_count,
    eval_pairs,
    kernel_eval,
    median_trick,
    reset_eval_count,
)
from .metrics import (
    AggregateReport,
    EvalReport,
    aggregate,
    covering_metric,
    evaluate,
    v_measure,
)
from .segment import (
    ChangePointEstimate,
    MergeParams,
    Segmentation,
    adaptive_lags,
    bandwidth_ladder,
    default_bandwidth,
    detect_multi_lag,
    detect_single_lag,
    locate_changes,
    multi_lag_merge,
    multiscale_merge,
    run_adaptive,
    run_multi_lag,
    run_multiscale,
    run_single_lag,
)
from .simulate import (
    SCENARIO_IDS,
    LabeledSeries,
    ScenarioSpec,
    default_length,
    generate,
    generate_custom,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateReport",
    "BootstrapConfig",
    "BootstrapResult",
    "ChangePointEstimate",
    "DegenerateScale",
    "DetectorProfile",
    "EvalReport",
    "KernelSpec",
    "LabeledSeries",
    "LaggedSeries",
    "MergeParams",
    "SCENARIO_IDS",
    "ScenarioSpec",
    "Segmentation",
    "TimeSeries",
    "adaptive_lags",
    "aggregate",
    "auto_scale",
    "bandwidth_ladder",
    "bootstrap_replicate",
    "covering_metric",
    "default_bandwidth",
    "default_block_scale",
    "default_length",
    "detect_multi_lag",
    "detect_single_lag",
    "detector_profile",
    "direct_detector",
    "eval_count",
    "eval_pairs",
    "evaluate",
    "generate",
    "generate_custom",
    "generate_multipliers",
    "importance_score",
    "kernel_eval",
    "locate_changes",
    "make_lagged",
    "median_trick",
    "multi_lag_merge",
    "multiscale_merge",
    "reset_eval_count",
    "run_adaptive",
    "run_bootstrap",
    "run_multi_lag",
    "run_multiscale",
    "run_single_lag",
    "threshold_rank",
    "v_measure",
]
