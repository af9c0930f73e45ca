"""Kernel plug-in estimation of bridge drifts from i.i.d. pair samples.

Library layers: synthetic pair laws (models), quadrature ground truth
(truth), the plug-in estimator with stability floors (estimator),
bandwidth grids with oracle/selector diagnostics (bandwidth), pointwise
inference (inference), and experiment drivers plus a CLI (experiments,
cli).  Hot kernels run through a numba backend with a pure-numpy
fallback; see backend.set_backend and the SBDRIFT_BACKEND variable.
"""

from .backend import active_backend, set_backend
from .bandwidth import (
    BandwidthGrid,
    build_grid,
    gl_select,
    grid_ise,
    oracle_bandwidth,
    oracle_ratio,
    penalty,
    sup_grid_error,
)
from .config import ExperimentConfig, config_sha256, load_config, resolve_config
from .errors import (
    ConfigError,
    DegenerateConditioningError,
    EstimatorFlooredError,
    RatioTransferNotApplicableError,
    SamplingBudgetError,
    TruthNotConvergedError,
)
from .estimator import (
    DriftEstimate,
    FloorSpec,
    bandwidth_stack,
    estimate_drift,
    estimate_drift_grid,
    estimate_f,
    estimate_g,
    ratio_transfer_bound,
)
from .inference import (
    anderson_darling,
    confidence_interval,
    plugin_variance,
    qq_data,
    standardized_stat,
    theory_secant_slope,
)
from .kernels import epanechnikov_spec, eval_kernel, eval_scaled, kernel_constants
from .models import TESTBEDS, make_law, sample_dataset
from .streams import derive_stream
from .truth import (
    IntervalSpec,
    Query,
    build_truth_cache,
    evaluation_grid,
    population_moments,
    preflight,
    true_drift,
)

__version__ = "0.1.0"

__all__ = [
    "BandwidthGrid",
    "ConfigError",
    "DegenerateConditioningError",
    "DriftEstimate",
    "EstimatorFlooredError",
    "ExperimentConfig",
    "FloorSpec",
    "IntervalSpec",
    "Query",
    "RatioTransferNotApplicableError",
    "SamplingBudgetError",
    "TESTBEDS",
    "TruthNotConvergedError",
    "active_backend",
    "anderson_darling",
    "bandwidth_stack",
    "build_grid",
    "build_truth_cache",
    "confidence_interval",
    "config_sha256",
    "derive_stream",
    "epanechnikov_spec",
    "estimate_drift",
    "estimate_drift_grid",
    "estimate_f",
    "estimate_g",
    "eval_kernel",
    "eval_scaled",
    "evaluation_grid",
    "gl_select",
    "grid_ise",
    "kernel_constants",
    "load_config",
    "make_law",
    "oracle_bandwidth",
    "oracle_ratio",
    "penalty",
    "plugin_variance",
    "population_moments",
    "preflight",
    "qq_data",
    "ratio_transfer_bound",
    "resolve_config",
    "sample_dataset",
    "set_backend",
    "standardized_stat",
    "sup_grid_error",
    "theory_secant_slope",
    "true_drift",
]
