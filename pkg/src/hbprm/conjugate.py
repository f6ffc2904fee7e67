"""Conjugate conditionals of the hyperparameters ``mu_k`` and ``sigma2_k``.

Inverse-gamma convention: ``IG(shape, scale)`` has density

    p(s) = scale^shape / Gamma(shape) * s^(-shape - 1) * exp(-scale / s),

so a draw is ``scale / G`` with ``G ~ Gamma(shape, 1)`` and the mean is
``scale / (shape - 1)`` for ``shape > 1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .exceptions import DomainError
from .model import PriorConfig

__all__ = [
    "GaussianParams",
    "InvGammaParams",
    "mu_conditional",
    "sigma2_conditional",
    "draw_gaussian",
    "draw_inverse_gamma",
]


@dataclass(frozen=True)
class GaussianParams:
    mean: float
    variance: float

    def __post_init__(self):
        if not self.variance > 0:
            raise DomainError(f"variance must be positive, got {self.variance}")


@dataclass(frozen=True)
class InvGammaParams:
    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise DomainError(f"shape and scale must be positive, got {self.shape}, {self.scale}")


@njit(cache=True, nogil=True)
def _mu_posterior(m, tau2, n_groups, sum_w, sigma2):
    precision = 1.0 / tau2 + n_groups / sigma2
    return (m / tau2 + sum_w / sigma2) / precision, 1.0 / precision


@njit(cache=True, nogil=True)
def _sigma2_posterior(a, b, n_groups, sum_sq):
    return 0.5 * (a + n_groups), 0.5 * (b + sum_sq)


def mu_conditional(w_column, sigma2_k: float, prior: PriorConfig) -> GaussianParams:
    """Gaussian conditional of ``mu_k`` given ``w_{1k}..w_{Jk}`` and ``sigma2_k``."""
    w_column = np.atleast_1d(np.asarray(w_column, dtype=float))
    if w_column.size < 1:
        raise DomainError("need at least one group")
    if not sigma2_k > 0:
        raise DomainError(f"sigma2_k must be positive, got {sigma2_k}")
    mean, var = _mu_posterior(prior.m, prior.tau2, w_column.size, w_column.sum(), float(sigma2_k))
    return GaussianParams(float(mean), float(var))


def sigma2_conditional(w_column, mu_k: float, prior: PriorConfig) -> InvGammaParams:
    """Inverse-gamma conditional of ``sigma2_k`` given the coefficients and ``mu_k``."""
    w_column = np.atleast_1d(np.asarray(w_column, dtype=float))
    if w_column.size < 1:
        raise DomainError("need at least one group")
    shape, scale = _sigma2_posterior(
        prior.a, prior.b, w_column.size, float(np.sum((w_column - mu_k) ** 2))
    )
    return InvGammaParams(float(shape), float(scale))


def draw_gaussian(params: GaussianParams, rng: np.random.Generator, size=None):
    return params.mean + np.sqrt(params.variance) * rng.standard_normal(size)


def draw_inverse_gamma(params: InvGammaParams, rng: np.random.Generator, size=None):
    return params.scale / rng.standard_gamma(params.shape, size)
