"""Data and parameter containers for the hierarchical Poisson regression model.

The model is

    y_ij | w_j        ~ Poisson(exp(x_ij . w_j))
    w_jk | mu_k, s2_k ~ N(mu_k, s2_k)
    mu_k              ~ N(m, tau2)
    s2_k              ~ IG(a, b)

with groups ``j = 0..J-1`` and covariates ``k = 0..K-1`` (0-based internally,
1-based in every file or message shown to a user).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np
from scipy.special import gammaln

from .exceptions import ConfigError, DataError

__all__ = [
    "GroupedCountDataset",
    "ModelState",
    "PriorConfig",
    "ChainOutput",
    "log_poisson_likelihood",
    "linear_predictor",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class GroupedCountDataset:
    """Covariates, counts and group membership for ``N_d`` observations.

    Observations are stored contiguously by group: rows
    ``offsets[j]:offsets[j + 1]`` of ``x`` and ``y`` belong to group ``j``.
    Arrays are read-only so one instance can be shared between chains.

    Parameters
    ----------
    x : array-like, shape (N_d, K)
        Real covariates.
    y : array-like, shape (N_d,)
        Non-negative integer counts.
    groups : array-like, shape (N_d,)
        Group label of each row. Groups are numbered in order of first
        appearance.
    group_covariate : array-like, shape (J,), optional
        Group-level covariate (only produced by the synthetic generators).
    require_positive : bool, default True
        Reject zero counts. Raw generator output sets this to False; the
        samplers always call :meth:`check_positive` themselves.
    """

    def __init__(
        self,
        x,
        y,
        groups,
        *,
        group_covariate=None,
        require_positive: bool = True,
    ):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2:
            raise ConfigError(f"x must be 2-D, got shape {x.shape}")
        n, k = x.shape
        if n == 0 or k == 0:
            raise DataError("dataset needs at least one observation and one covariate")
        if not np.all(np.isfinite(x)):
            raise DataError("covariates must be finite")

        y_raw = np.asarray(y)
        if y_raw.shape != (n,):
            raise ConfigError(f"y must have shape ({n},), got {y_raw.shape}")
        y_float = y_raw.astype(float)
        if not np.all(np.isfinite(y_float)) or np.any(y_float != np.round(y_float)):
            bad = int(np.flatnonzero(~np.isfinite(y_float) | (y_float != np.round(y_float)))[0])
            raise DataError(f"count at row {bad + 1} is not an integer: {y_raw[bad]!r}")
        if np.any(y_float < 0):
            bad = int(np.flatnonzero(y_float < 0)[0])
            raise DataError(f"count at row {bad + 1} is negative: {y_raw[bad]!r}")
        y_int = y_float.astype(np.int64)

        groups = np.asarray(groups)
        if groups.shape != (n,):
            raise ConfigError(f"groups must have shape ({n},), got {groups.shape}")
        labels, first, inverse = np.unique(groups, return_index=True, return_inverse=True)
        # renumber by first appearance
        order = np.argsort(first, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        group_index = rank[inverse.ravel()]
        labels = labels[order]

        perm = np.argsort(group_index, kind="stable")
        counts = np.bincount(group_index, minlength=labels.size)

        self.x = _readonly(np.ascontiguousarray(x[perm]))
        self.y = _readonly(y_int[perm])
        self.group_index = _readonly(group_index[perm].astype(np.int64))
        self.offsets = _readonly(np.concatenate([[0], np.cumsum(counts)]).astype(np.int64))
        self.labels = tuple(labels.tolist())
        # row order of the caller's input, to map predictions back
        self.input_order = _readonly(perm.astype(np.int64))

        if group_covariate is not None:
            gc = np.asarray(group_covariate, dtype=float)
            if gc.shape != (self.n_groups,):
                raise ConfigError(
                    f"group_covariate must have shape ({self.n_groups},), got {gc.shape}"
                )
            group_covariate = _readonly(gc.copy())
        self.group_covariate = group_covariate

        if require_positive:
            self.check_positive()

    @classmethod
    def from_groups(cls, groups: Sequence[tuple[Any, Any]], **kwargs) -> "GroupedCountDataset":
        """Build from a list of ``(x_j, y_j)`` pairs, one per group."""
        if len(groups) == 0:
            raise DataError("at least one group is required")
        xs, ys, gs = [], [], []
        for j, (xj, yj) in enumerate(groups):
            xj = np.asarray(xj, dtype=float)
            if xj.ndim == 1:
                xj = xj[:, None]
            yj = np.atleast_1d(np.asarray(yj))
            if len(yj) == 0:
                raise DataError(f"group {j + 1} is empty")
            xs.append(xj)
            ys.append(yj)
            gs.append(np.full(len(yj), j))
        return cls(np.vstack(xs), np.concatenate(ys), np.concatenate(gs), **kwargs)

    @property
    def n_obs(self) -> int:
        return int(self.y.size)

    @property
    def n_groups(self) -> int:
        return len(self.labels)

    @property
    def n_covariates(self) -> int:
        return int(self.x.shape[1])

    @property
    def n_per_group(self) -> np.ndarray:
        return np.diff(self.offsets)

    def group(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Covariate matrix and counts of group ``j`` (0-based)."""
        if not 0 <= j < self.n_groups:
            raise IndexError(f"group index {j} out of range for J={self.n_groups}")
        s = slice(self.offsets[j], self.offsets[j + 1])
        return self.x[s], self.y[s]

    @property
    def groups(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [self.group(j) for j in range(self.n_groups)]

    @cached_property
    def log_factorial(self) -> np.ndarray:
        """``ln(y!)`` per observation, via the log-gamma function."""
        return _readonly(gammaln(self.y + 1.0))

    def check_positive(self) -> None:
        """Raise :class:`DataError` unless every count is at least 1."""
        if np.any(self.y < 1):
            bad = int(np.flatnonzero(self.y < 1)[0])
            row = int(self.input_order[bad]) + 1
            raise DataError(
                f"zero count at row {row}: the Gaussian approximation to the "
                "log-gamma likelihood needs positive counts; shift every count by a "
                "positive integer (shift_counts) or drop the zero rows"
            )

    def _replace_counts(self, y: np.ndarray, keep: np.ndarray | None = None):
        labels = np.asarray(self.labels)[self.group_index]
        x, gc = self.x, self.group_covariate
        if keep is not None:
            x, y, labels = x[keep], y[keep], labels[keep]
            if gc is not None:
                gc = gc[np.unique(self.group_index[keep])]
        if y.size == 0:
            raise DataError("no observations left")
        return GroupedCountDataset(x, y, labels, group_covariate=gc)

    def shifted(self, shift: int) -> "GroupedCountDataset":
        """Copy with every count increased by the positive integer ``shift``."""
        if int(shift) != shift or shift < 1:
            raise ConfigError(f"shift must be a positive integer, got {shift!r}")
        return self._replace_counts(self.y + int(shift))

    def drop_zero_counts(self) -> "GroupedCountDataset":
        """Copy without the zero-count rows (groups left empty are removed)."""
        return self._replace_counts(self.y, keep=self.y > 0)

    def __repr__(self) -> str:
        return (
            f"GroupedCountDataset(N_d={self.n_obs}, K={self.n_covariates}, "
            f"J={self.n_groups})"
        )


@dataclass
class ModelState:
    """Current value of every parameter in one chain."""

    w: np.ndarray
    mu: np.ndarray
    sigma2: np.ndarray

    def __post_init__(self):
        self.w = np.array(self.w, dtype=float, ndmin=2)
        self.mu = np.array(self.mu, dtype=float, ndmin=1)
        self.sigma2 = np.array(self.sigma2, dtype=float, ndmin=1)
        k = self.w.shape[1]
        if self.mu.shape != (k,) or self.sigma2.shape != (k,):
            raise ConfigError(
                f"mu and sigma2 must have shape ({k},); got {self.mu.shape}, {self.sigma2.shape}"
            )
        if not (np.all(np.isfinite(self.w)) and np.all(np.isfinite(self.mu))):
            raise ConfigError("state entries must be finite")
        if not np.all(np.isfinite(self.sigma2)) or np.any(self.sigma2 <= 0):
            raise ConfigError("sigma2 entries must be positive and finite")

    @property
    def n_groups(self) -> int:
        return self.w.shape[0]

    @property
    def n_covariates(self) -> int:
        return self.w.shape[1]

    def check_matches(self, data: GroupedCountDataset) -> None:
        if self.w.shape != (data.n_groups, data.n_covariates):
            raise ConfigError(
                f"state has (J, K) = {self.w.shape}, dataset has "
                f"({data.n_groups}, {data.n_covariates})"
            )

    def copy(self) -> "ModelState":
        return ModelState(self.w.copy(), self.mu.copy(), self.sigma2.copy())


@dataclass(frozen=True)
class PriorConfig:
    """Hyperprior constants.

    ``mu_k ~ N(m, tau2)``. The variance conditional is
    ``IG((a + J) / 2, (b + sum_j (w_jk - mu_k)^2) / 2)``, where ``IG(shape, scale)``
    has density ``scale^shape / Gamma(shape) * s^(-shape - 1) * exp(-scale / s)``.
    Defaults are the weakly informative N(0, 1) / IG(1, 1) choice.
    """

    m: float = 0.0
    tau2: float = 1.0
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        for name in ("m", "tau2", "a", "b"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(f"prior {name} must be finite")
        for name in ("tau2", "a", "b"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"prior {name} must be positive, got {getattr(self, name)}")


@dataclass
class ChainOutput:
    """Retained draws of every chain.

    Attributes
    ----------
    w : ndarray, shape (n_chains, n_keep, J, K)
    mu, sigma2 : ndarray, shape (n_chains, n_keep, K)
    warmup_count, retained_count : int
        ``N_0`` and ``N_1``.
    chain_seconds : ndarray, shape (n_chains,)
        Wall time of each chain's sampling loop.
    sampler : str
    stats : dict
        Sampler-specific extras (acceptance rates, step sizes).
    """

    w: np.ndarray
    mu: np.ndarray
    sigma2: np.ndarray
    warmup_count: int
    retained_count: int
    chain_seconds: np.ndarray
    sampler: str = "ags"
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        m, n = self.w.shape[:2]
        if n != self.retained_count or self.mu.shape[:2] != (m, n):
            raise ConfigError("draw arrays do not match retained_count / chain count")

    @property
    def n_chains(self) -> int:
        return self.w.shape[0]

    @property
    def iterations(self) -> int:
        return self.warmup_count + self.retained_count

    @property
    def n_draws(self) -> int:
        """Total retained states, ``n_chains * N_1``."""
        return self.n_chains * self.retained_count

    @property
    def wall_seconds(self) -> float:
        return float(np.sum(self.chain_seconds))

    @property
    def t_s(self) -> float:
        """Mean per-chain sampling time in seconds per 1000 iterations."""
        return float(np.mean(self.chain_seconds)) / self.iterations * 1000.0

    def state(self, chain: int, draw: int) -> ModelState:
        return ModelState(
            self.w[chain, draw].copy(), self.mu[chain, draw].copy(), self.sigma2[chain, draw].copy()
        )

    def posterior_mean_w(self) -> np.ndarray:
        return self.w.mean(axis=(0, 1))

    def parameter_samples(self) -> dict[str, np.ndarray]:
        """Map 1-based parameter names to ``(n_chains, n_keep)`` arrays.

        Order: ``w[1,1] .. w[J,K]``, then ``mu[1..K]``, then ``sigma2[1..K]``.
        """
        _, _, J, K = self.w.shape
        out = {}
        for j in range(J):
            for k in range(K):
                out[f"w[{j + 1},{k + 1}]"] = self.w[:, :, j, k]
        for k in range(K):
            out[f"mu[{k + 1}]"] = self.mu[:, :, k]
        for k in range(K):
            out[f"sigma2[{k + 1}]"] = self.sigma2[:, :, k]
        return out


def _eta(w: np.ndarray, data: GroupedCountDataset) -> np.ndarray:
    return np.einsum("ik,ik->i", data.x, w[data.group_index])


def log_poisson_likelihood(state: ModelState, data: GroupedCountDataset) -> float:
    """Poisson log-likelihood ``sum_ij [y_ij eta_ij - exp(eta_ij) - ln y_ij!]``."""
    state.check_matches(data)
    eta = _eta(state.w, data)
    return float(np.sum(data.y * eta - np.exp(eta) - data.log_factorial))


def linear_predictor(state: ModelState, data: GroupedCountDataset, j: int, i: int) -> float:
    """``ln lambda_ij = sum_k w_jk x_ijk`` for observation ``i`` of group ``j``."""
    state.check_matches(data)
    xj, _ = data.group(j)
    if not 0 <= i < xj.shape[0]:
        raise IndexError(f"observation index {i} out of range for group of size {xj.shape[0]}")
    return float(xj[i] @ state.w[j])
