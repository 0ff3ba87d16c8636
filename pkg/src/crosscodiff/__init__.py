"""Cross-codifference tools for bidimensional VAR(1) models with Gaussian and
sub-Gaussian (infinite-variance) innovations."""

from crosscodiff.errors import (
    ConfigError,
    CrossCodiffError,
    DegenerateCFError,
    FitError,
    LagRangeError,
    ModelDomainError,
    ParameterDomainError,
)
from crosscodiff.stable_noise import (
    CovMatrix2,
    GaussianNoise,
    StableParams,
    SubGaussianNoise,
    noise_log_cf,
    sample_gaussian_pair,
    sample_stable,
    sample_subgaussian_pair,
)
from crosscodiff.var_process import (
    BiTrajectory,
    Theta,
    VarModel,
    check_stationarity,
    ma_weights,
    simulate,
    theta_power,
)
from crosscodiff.theory import (
    CodiffSeries,
    codiff_asymptotic_rate,
    codiff_example_closed_form,
    codiff_gaussian,
    codiff_general,
    codiff_subgaussian,
)
from crosscodiff.estimator import empirical_cf, empirical_codiff, empirical_codiff_series
from crosscodiff.fitting import (
    extract_noise,
    fit_decay,
    fit_noise_cf,
    fit_theta_diagonal,
    run_mc_study,
)

__version__ = "0.1.0"

__all__ = [
    "BiTrajectory",
    "CodiffSeries",
    "ConfigError",
    "CovMatrix2",
    "CrossCodiffError",
    "DegenerateCFError",
    "FitError",
    "GaussianNoise",
    "LagRangeError",
    "ModelDomainError",
    "ParameterDomainError",
    "StableParams",
    "SubGaussianNoise",
    "Theta",
    "VarModel",
    "check_stationarity",
    "codiff_asymptotic_rate",
    "codiff_example_closed_form",
    "codiff_gaussian",
    "codiff_general",
    "codiff_subgaussian",
    "empirical_cf",
    "empirical_codiff",
    "empirical_codiff_series",
    "extract_noise",
    "fit_decay",
    "fit_noise_cf",
    "fit_theta_diagonal",
    "ma_weights",
    "noise_log_cf",
    "run_mc_study",
    "sample_gaussian_pair",
    "sample_stable",
    "sample_subgaussian_pair",
    "simulate",
    "theta_power",
]
