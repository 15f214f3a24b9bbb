"""Collective and point anomaly detection for univariate series.

The detector finds segments whose mean and/or variance deviate from a
robustly estimated typical distribution (collective anomalies) while
simultaneously flagging isolated outliers (point anomalies), by minimising
a penalised cost with a pruned dynamic program.  The package also ships a
classical changepoint baseline, a synthetic benchmark harness, and a
phase-folding period scan for transit-like dips in light curves.
"""

__version__ = "0.1.0"

from .capa import (
    CapaConfig,
    CollectiveAnomaly,
    Detection,
    PointAnomaly,
    default_beta,
    default_beta_prime,
    detect,
    detection_from_dict,
    detection_to_dict,
    exhaustive_detect,
    fp_control_penalties,
    point_anomaly_threshold,
    prune_candidates,
    pruning_trace,
    resolve_penalties,
)
from .cost import (
    PrefixStats,
    SegmentStats,
    classical_segment_cost,
    collective_cost,
    point_anomaly_cost,
    prefix_stats,
    segment_stats,
    typical_cost,
)
from .exceptions import (
    CapanomError,
    DegenerateScaleError,
    DegenerateSegmentError,
    InvalidInputError,
)
from .pelt import (
    ChangepointResult,
    bic_penalty,
    pelt_detect,
    strengthened_sic_penalty,
)
from .robust import (
    IQR_NORMAL_WIDTH,
    TypicalParams,
    estimate_params,
    median,
    robust_sigma,
    standardize,
)
from .series import Series, as_series, observed, read_value_series
from .simulate import (
    EvalReport,
    GroundTruth,
    Scenario,
    boundary_distances,
    generate,
    loglog_slope,
    match_events,
    roc_sweep,
    run_method,
    runtime_experiment,
)
from .transit import (
    DEFAULT_BIN_WIDTH,
    DEFAULT_SCAN_GUARD,
    LightCurve,
    PeriodRecord,
    PeriodScan,
    bin_average,
    period_grid,
    phase_fold,
    read_light_curve,
    scan_periods,
    write_period_scan,
)
