"""Synthetic grouped count data.

Two families, both with ``n_per_group`` rows in each of ``J`` groups:

``large``
    ``x_k ~ U(range_k)``, group scale ``x_.j ~ U(1e4, 1e6)``,
    ``w_jk ~ N(0.001, 0.001)``, ``y = round(minmax(exp(x . w_j)) * x_.j)``.
``small``
    Same covariates (first five ranges), ``x_.j ~ TruncExp(0.7, 1, y_max)``,
    ``w_jk ~ N(0.1, 0.1)``, ``y = floor(minmax(exp(x . w_j)) * x_.j)``.

``N(mean, variance)`` throughout. The min-max normalisation runs within each
group.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError
from .model import GroupedCountDataset

__all__ = [
    "COVARIATE_RANGES",
    "SynthSpec",
    "TruncExpParams",
    "min_max_normalize",
    "sample_trunc_exp",
    "generate_large",
    "generate_small",
    "generate",
    "generate_poisson",
]

COVARIATE_RANGES = ((0.1, 2.0), (0.1, 1.0), (0.1, 0.5), (1.0, 10.0), (0.5, 5.0), (10.0, 100.0))
FAMILY_MAX_K = {"large": 6, "small": 5}


@dataclass(frozen=True)
class SynthSpec:
    family: str = "large"
    J: int = 10
    n_per_group: int = 20
    K: int = 2
    y_max: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILY_MAX_K:
            raise ConfigError(f"family must be 'large' or 'small', got {self.family!r}")
        if not 1 <= self.K <= FAMILY_MAX_K[self.family]:
            raise ConfigError(f"K must be in [1, {FAMILY_MAX_K[self.family]}] for {self.family}")
        if self.J < 1 or self.n_per_group < 1:
            raise ConfigError("J and n_per_group must be positive")
        if self.family == "small" and (self.y_max is None or not self.y_max > 1):
            raise ConfigError("the small family needs y_max > 1")


@dataclass(frozen=True)
class TruncExpParams:
    """Density proportional to ``exp(rate * x)`` on ``[lower, upper]``."""

    rate: float = 0.7
    lower: float = 1.0
    upper: float = 10.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ConfigError("rate must be positive")
        if not self.lower < self.upper:
            raise ConfigError("lower must be below upper")

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.lower, self.upper)
        return np.expm1(self.rate * (x - self.lower)) / math.expm1(
            self.rate * (self.upper - self.lower)
        )


def min_max_normalize(values) -> np.ndarray:
    """``(v - min) / (max - min)``; a constant input maps to zeros."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ConfigError("cannot normalise an empty array")
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def sample_trunc_exp(params: TruncExpParams, rng: np.random.Generator, size=None):
    """Inverse-CDF draw from :class:`TruncExpParams` (weighted toward ``upper``)."""
    u = rng.random(size)
    span = params.upper - params.lower
    return params.lower + np.log1p(u * math.expm1(params.rate * span)) / params.rate


def _covariates(rng, J, n, K):
    lows = np.array([r[0] for r in COVARIATE_RANGES[:K]])
    highs = np.array([r[1] for r in COVARIATE_RANGES[:K]])
    return rng.uniform(lows, highs, size=(J * n, K))


def _scaled_counts(x, w, group_scale, n, rounding):
    J = w.shape[0]
    y = np.empty(J * n)
    for j in range(J):
        rows = slice(j * n, (j + 1) * n)
        y[rows] = rounding(min_max_normalize(np.exp(x[rows] @ w[j])) * group_scale[j])
    return y.astype(np.int64)


def generate_large(spec: SynthSpec) -> tuple[GroupedCountDataset, np.ndarray]:
    """Large-count dataset and its generating coefficients ``(J, K)``.

    Counts that round to zero (each group's minimum) are raised to one.
    """
    if spec.family != "large":
        raise ConfigError("generate_large needs family='large'")
    rng = np.random.default_rng(spec.seed)
    J, n, K = spec.J, spec.n_per_group, spec.K
    x = _covariates(rng, J, n, K)
    group_scale = rng.uniform(1e4, 1e6, size=J)
    w = rng.normal(0.001, math.sqrt(0.001), size=(J, K))
    y = _scaled_counts(x, w, group_scale, n, lambda v: np.floor(v + 0.5))
    y = np.maximum(y, 1)
    groups = np.repeat(np.arange(1, J + 1), n)
    return GroupedCountDataset(x, y, groups, group_covariate=group_scale), w


def generate_small(spec: SynthSpec) -> tuple[GroupedCountDataset, np.ndarray]:
    """Small-count dataset (zeros kept) and its generating coefficients."""
    if spec.family != "small":
        raise ConfigError("generate_small needs family='small'")
    rng = np.random.default_rng(spec.seed)
    J, n, K = spec.J, spec.n_per_group, spec.K
    x = _covariates(rng, J, n, K)
    group_scale = sample_trunc_exp(TruncExpParams(0.7, 1.0, float(spec.y_max)), rng, size=J)
    w = rng.normal(0.1, math.sqrt(0.1), size=(J, K))
    y = _scaled_counts(x, w, group_scale, n, np.floor)
    groups = np.repeat(np.arange(1, J + 1), n)
    data = GroupedCountDataset(x, y, groups, group_covariate=group_scale, require_positive=False)
    return data, w


def generate(spec: SynthSpec) -> tuple[GroupedCountDataset, np.ndarray]:
    return generate_large(spec) if spec.family == "large" else generate_small(spec)


def generate_poisson(
    J: int,
    n_per_group: int,
    w,
    covariate_ranges=((1.0, 1.0), (-1.0, 1.0)),
    seed: int = 0,
) -> GroupedCountDataset:
    """Counts drawn from the Poisson model itself, ``y ~ Pois(exp(x . w_j))``.

    ``w`` is the ``(J, K)`` coefficient matrix; covariate ``k`` is uniform on
    ``covariate_ranges[k]`` (a degenerate range gives a constant column, e.g.
    an intercept). Zero draws are kept; callers decide how to handle them.
    """
    w = np.asarray(w, dtype=float)
    if w.shape[0] != J or w.shape[1] != len(covariate_ranges):
        raise ConfigError("w must have shape (J, len(covariate_ranges))")
    rng = np.random.default_rng(seed)
    lows = np.array([r[0] for r in covariate_ranges])
    highs = np.array([r[1] for r in covariate_ranges])
    x = lows + (highs - lows) * rng.random((J * n_per_group, len(covariate_ranges)))
    groups = np.repeat(np.arange(1, J + 1), n_per_group)
    y = rng.poisson(np.exp(np.einsum("ik,ik->i", x, w[groups - 1])))
    return GroupedCountDataset(x, y, groups, require_positive=False)
