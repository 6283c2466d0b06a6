"""Numerical laboratory for standardized random Fourier features.

Implements the cosine feature map and its Gaussian target kernel, the
within-sample standardized variant and the training-set dependent limit it
converges to, Monte Carlo experiment harnesses that quantify the gap, and
closed-form minimax lower bounds with sample-size calibration.
"""

__version__ = "0.1.0"

from .bounds import (
    BindingTerm,
    BoundParams,
    BoundReport,
    Regime,
    diagnose_regime,
    effective_vc,
    evaluate_bounds,
    exp_lower_bound,
    poly_lower_bound,
    shattering_probe,
    t_crit,
)
from .config import ExperimentConfig, ProcessParams, config_from_dict, load_config
from .datagen import PredictorPanel, PredictorProcessSpec, build_sigma_u, simulate_panel
from .errors import (
    DegenerateDenominator,
    DegenerateOracle,
    DegenerateScale,
    ParameterError,
)
from .harness import (
    CalibrationScenario,
    evaluation_pairs,
    preset_scenarios,
    run_calibration,
    run_convergence,
    run_sweep,
)
from .oracle import (
    LimitKernelEstimate,
    ScalingProbeResult,
    SmallBallPoint,
    h_value,
    limit_kernel_mc,
    radial_g,
    scaling_dependence_probe,
    small_ball_curve,
)
from .rff import (
    SCALE_FLOOR,
    FeatureBank,
    KernelValue,
    ScaleMode,
    StandardizedBank,
    compute_scales,
    empirical_kernel,
    feature_map,
    gaussian_kernel,
    sample_features,
    standardized_empirical_kernel,
    window_id,
)
from .stats import (
    ErrorLabel,
    ErrorSample,
    KsResult,
    degradation_factor,
    fit_loglog_slope,
    ks_two_sample,
    mean_abs_error,
)
from .streams import derive_stream
