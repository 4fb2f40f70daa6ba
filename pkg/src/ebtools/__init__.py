"""Large-scale simultaneous inference toolkit.

Builds z-values from two-sample expression data, estimates tail-area false
discovery rates under theoretical or empirical nulls, shrinks point
estimates (exact Bayes and James-Stein), recovers effect sizes from the
marginal z density, stratifies analyses by a covariate, and certifies the
shrinkage and Fdr-control guarantees by Monte Carlo.
"""

__version__ = "0.1.0"

from .distributions import (
    GaussianParams,
    STANDARD_NORMAL,
    normal_cdf,
    normal_pdf,
    normal_quantile,
    normal_sf,
    normal_tail,
    student_t_cdf,
)
from .effect_size import (
    DensityFit,
    EffectSizeReport,
    NaturalCubicBasis,
    effect_size_report,
    fit_marginal_density,
    tweedie_estimate,
)
from .empirical_null import (
    CentralFitConfig,
    EmpiricalNullFit,
    fit_empirical_null,
    null_expected_exceedances,
)
from .errors import (
    ClipWarning,
    ConvergenceError,
    DataError,
    DegeneracyWarning,
    DomainError,
    EmptyTailWarning,
    ExtrapolationWarning,
    SaturationWarning,
    ToolkitError,
    ToolkitWarning,
)
from .fdr import (
    CurvePoint,
    FdrReport,
    GaussianMixture,
    NullModel,
    TwoGroupsModel,
    bh_threshold,
    fdr_hat,
    true_fdr,
)
from .montecarlo import (
    RNG_ALGORITHM,
    SimConfig,
    SimResult,
    certify_dominance,
    certify_fdr_control,
    certify_tweedie,
    simulate_normal_normal,
)
from .relevance import (
    DetrendResult,
    LineFit,
    Stratification,
    StratifiedFdrResult,
    least_squares_line,
    running_median_detrend,
    stratified_fdr,
)
from .shrinkage import (
    NormalNormalModel,
    ShrinkageResult,
    bayes_posterior_mean,
    james_stein,
    posterior_odds,
)
from .zvalues import (
    ExpressionMatrix,
    Z_SATURATION,
    ZVector,
    matrix_to_zvector,
    t_to_z,
    two_sample_t,
)

__all__ = [
    "__version__",
    "CentralFitConfig",
    "ClipWarning",
    "ConvergenceError",
    "CurvePoint",
    "DataError",
    "DegeneracyWarning",
    "DensityFit",
    "DetrendResult",
    "DomainError",
    "EffectSizeReport",
    "EmptyTailWarning",
    "EmpiricalNullFit",
    "ExpressionMatrix",
    "ExtrapolationWarning",
    "FdrReport",
    "GaussianMixture",
    "GaussianParams",
    "LineFit",
    "NaturalCubicBasis",
    "NormalNormalModel",
    "NullModel",
    "RNG_ALGORITHM",
    "STANDARD_NORMAL",
    "SaturationWarning",
    "ShrinkageResult",
    "SimConfig",
    "SimResult",
    "Stratification",
    "StratifiedFdrResult",
    "ToolkitError",
    "ToolkitWarning",
    "TwoGroupsModel",
    "ZVector",
    "Z_SATURATION",
    "bayes_posterior_mean",
    "bh_threshold",
    "certify_dominance",
    "certify_fdr_control",
    "certify_tweedie",
    "effect_size_report",
    "fdr_hat",
    "fit_empirical_null",
    "fit_marginal_density",
    "james_stein",
    "least_squares_line",
    "matrix_to_zvector",
    "normal_cdf",
    "normal_pdf",
    "normal_quantile",
    "normal_sf",
    "normal_tail",
    "null_expected_exceedances",
    "posterior_odds",
    "running_median_detrend",
    "simulate_normal_normal",
    "stratified_fdr",
    "student_t_cdf",
    "t_to_z",
    "true_fdr",
    "tweedie_estimate",
    "two_sample_t",
]
