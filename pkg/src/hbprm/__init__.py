"""Approximate Gibbs sampling for hierarchical Bayesian Poisson regression.

Counts ``y_ij`` in group ``j`` follow ``Poisson(exp(x_ij . w_j))`` with group
coefficients ``w_jk ~ N(mu_k, sigma2_k)`` and hyperpriors ``mu_k ~ N(m, tau2)``,
``sigma2_k ~ IG(a, b)``. The approximate sampler replaces each Poisson factor
by a Gaussian in the linear predictor so every full conditional is a closed
form draw; an exact-likelihood Metropolis-within-Gibbs sampler is included as
a reference.
"""
__version__ = "0.1.0"

from .ags import AgsConfig, ags_sweep, coefficient_conditional, run_ags
from .conjugate import (
    GaussianParams,
    InvGammaParams,
    draw_gaussian,
    draw_inverse_gamma,
    mu_conditional,
    sigma2_conditional,
)
from .diagnostics import (
    DiagnosticsReport,
    characteristics,
    diagnostics_report,
    effective_sample_size,
    posterior_predictive_fit,
    r_squared,
    rmse,
)
from .estimator import HierarchicalPoissonRegressor
from .exceptions import ConfigError, DataError, DomainError, HBPRMError, UndefinedMetricWarning
from .io import ingest_csv
from .model import ChainOutput, GroupedCountDataset, ModelState, PriorConfig, log_poisson_likelihood
from .mwg import MwgConfig, run_mwg
from .special import PolygammaTable, ks_distance, log_gamma_approx, psi0, psi1
from .synth import SynthSpec, generate, generate_large, generate_poisson, generate_small

__all__ = [
    "AgsConfig",
    "ChainOutput",
    "ConfigError",
    "DataError",
    "DiagnosticsReport",
    "DomainError",
    "GaussianParams",
    "GroupedCountDataset",
    "HBPRMError",
    "HierarchicalPoissonRegressor",
    "InvGammaParams",
    "ModelState",
    "MwgConfig",
    "PolygammaTable",
    "PriorConfig",
    "SynthSpec",
    "UndefinedMetricWarning",
    "ags_sweep",
    "characteristics",
    "coefficient_conditional",
    "diagnostics_report",
    "draw_gaussian",
    "draw_inverse_gamma",
    "effective_sample_size",
    "generate",
    "generate_large",
    "generate_poisson",
    "generate_small",
    "ingest_csv",
    "ks_distance",
    "log_gamma_approx",
    "log_poisson_likelihood",
    "mu_conditional",
    "posterior_predictive_fit",
    "psi0",
    "psi1",
    "r_squared",
    "rmse",
    "run_ags",
    "run_mwg",
    "sigma2_conditional",
]
