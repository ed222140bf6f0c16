"""Tail-index change-point detection for heavy-tailed, long-memory series.

The package bundles a change-point test built on sequential Hill-type
tail estimators, an exact-covariance LMSV simulator driven by
fractional Gaussian noise, the two-parameter tail empirical process
machinery used to study the test's limit behavior, and a reproducible
Monte Carlo harness for size/power tables.
"""

__version__ = "0.1.0"

from .changepoint import (
    ChangePointReport,
    GammaPath,
    LEGACY_CRITVAL_95,
    decide,
    gamma_path,
    kolmogorov_cdf,
    kolmogorov_quantile,
    mc_critical_value,
    resolve_t0,
    test_statistic,
)
from .core import (
    AcfResult,
    QqData,
    TimeSeries,
    log_returns,
    normal_quantile,
    order_statistic,
    qq_pairs,
    sample_acf,
)
from .errors import (
    DomainError,
    ParseError,
    TailbreakError,
    ValidationError,
)
from .estimators import TailEstimate, gamma_threshold, hill_sequential
from .experiments import (
    CellResult,
    ExperimentConfig,
    LocationAccuracy,
    load_grid,
    location_accuracy,
    rejection_rate,
    run_table,
)
from .fgn import FgnSpec, fgn_autocov, generate_fgn
from .lmsv import (
    LmsvSpec,
    RegimeReport,
    classify_regime,
    exact_threshold,
    lrd_norming,
    marginal_survival,
    pareto_quantile,
    sample_innovations,
    simulate_lmsv,
)
from .tep import (
    RegimeProbe,
    SecondOrderFamily,
    TepSurface,
    centered_surface,
    regime_probe,
    second_order_bound_check,
    tail_surface,
)

__all__ = [
    "AcfResult",
    "CellResult",
    "ChangePointReport",
    "DomainError",
    "ExperimentConfig",
    "FgnSpec",
    "GammaPath",
    "LEGACY_CRITVAL_95",
    "LmsvSpec",
    "LocationAccuracy",
    "ParseError",
    "QqData",
    "RegimeProbe",
    "RegimeReport",
    "SecondOrderFamily",
    "TailEstimate",
    "TailbreakError",
    "TepSurface",
    "TimeSeries",
    "ValidationError",
    "centered_surface",
    "classify_regime",
    "decide",
    "exact_threshold",
    "fgn_autocov",
    "gamma_path",
    "gamma_threshold",
    "generate_fgn",
    "hill_sequential",
    "kolmogorov_cdf",
    "kolmogorov_quantile",
    "load_grid",
    "location_accuracy",
    "log_returns",
    "lrd_norming",
    "marginal_survival",
    "mc_critical_value",
    "normal_quantile",
    "order_statistic",
    "pareto_quantile",
    "qq_pairs",
    "regime_probe",
    "rejection_rate",
    "resolve_t0",
    "run_table",
    "sample_acf",
    "sample_innovations",
    "simulate_lmsv",
    "tail_surface",
    "test_statistic",
]
