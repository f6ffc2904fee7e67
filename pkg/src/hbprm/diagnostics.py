"""Convergence and fit diagnostics.

The multi-chain effective sample size uses the variogram form::

    var+   = (n - 1) / (m n) * sum_j s_j^2 + 1 / (m - 1) * sum_j (mean_j - mean)^2
    V_t    = sum_j sum_{i > t} (psi_ij - psi_{i-t,j})^2 / (m (n - t))
    rho_t  = 1 - V_t / (2 var+)
    n_eff  = m n / (1 + 2 sum_{t=1}^{T} rho_t)

where ``T`` is the first odd lag with ``rho_{T+1} + rho_{T+2} < 0``. When no
such lag exists every available lag ``1 .. n - 2`` is summed. The result is
capped at ``m n``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, UndefinedMetricWarning
from .model import ChainOutput, GroupedCountDataset

__all__ = [
    "effective_sample_size",
    "variogram",
    "autocorrelations",
    "r_squared",
    "rmse",
    "predict_counts",
    "posterior_predictive_fit",
    "Characteristics",
    "characteristics",
    "DiagnosticsReport",
    "diagnostics_report",
]


def _as_chains(samples) -> np.ndarray:
    s = np.asarray(samples, dtype=float)
    if s.ndim != 2:
        raise ConfigError(f"samples must be (chains, draws), got shape {s.shape}")
    m, n = s.shape
    if m < 2:
        raise ConfigError("effective sample size needs at least 2 chains")
    if n < 4:
        raise ConfigError("effective sample size needs at least 4 draws per chain")
    if not np.all(np.isfinite(s)):
        raise ConfigError("samples contain non-finite values")
    return s


def variogram(samples) -> np.ndarray:
    """``V_t`` for ``t = 0 .. n - 1`` of an ``(m, n)`` array.

    Uses ``sum_i (a_i - a_{i-t})^2 = S_head + S_tail - 2 c_t`` with the lagged
    cross products ``c_t`` from one zero-padded FFT per chain.
    """
    s = _as_chains(samples)
    m, n = s.shape
    s = s - s.mean(axis=1, keepdims=True)  # differences are shift-invariant
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(s, size, axis=1)
    cross = np.fft.irfft(f * np.conj(f), size, axis=1)[:, :n].sum(axis=0)
    sq = s**2
    head = np.cumsum(sq, axis=1)  # head[:, r] = sum_{i <= r} a_i^2
    total = head[:, -1]
    lags = np.arange(n)
    # sum_{i >= t} a_i^2 + sum_{i < n - t} a_i^2, summed over chains
    tail_part = (total[:, None] - np.concatenate([np.zeros((m, 1)), head[:, :-1]], axis=1)).sum(0)
    head_part = head[:, ::-1].sum(axis=0)
    v = (tail_part + head_part - 2.0 * cross) / (m * (n - lags))
    v[0] = 0.0
    return np.maximum(v, 0.0)


def _var_plus(s: np.ndarray) -> float:
    m, n = s.shape
    means = s.mean(axis=1)
    within = s.var(axis=1, ddof=1)
    return (n - 1) / (m * n) * within.sum() + np.sum((means - means.mean()) ** 2) / (m - 1)


def autocorrelations(samples) -> np.ndarray:
    """``rho_t`` for ``t = 1 .. n - 2``; NaN when ``var+`` is zero."""
    s = _as_chains(samples)
    vp = _var_plus(s)
    if not vp > 0:
        return np.full(s.shape[1] - 2, np.nan)
    return 1.0 - variogram(s)[1:-1] / (2.0 * vp)


def _truncation_lag(rho: np.ndarray) -> int:
    """Number of leading ``rho`` terms to sum (``rho[0]`` is lag 1)."""
    # rho[t - 1] is lag t; need lags T + 1, T + 2 <= len(rho)
    for T in range(1, len(rho) - 1, 2):
        if rho[T] + rho[T + 1] < 0:
            return T
    return len(rho)


def effective_sample_size(samples) -> float:
    """Multi-chain ``n_eff`` of one scalar estimand.

    Parameters
    ----------
    samples : array_like, shape (m, n)
        ``m >= 2`` chains of ``n >= 4`` draws.

    Returns
    -------
    float
        In ``(0, m n]``, or NaN (with an :class:`UndefinedMetricWarning`) when
        every draw is identical.
    """
    s = _as_chains(samples)
    m, n = s.shape
    rho = autocorrelations(s)
    if np.isnan(rho).any():
        warnings.warn("constant samples: effective sample size undefined", UndefinedMetricWarning, stacklevel=2)
        return float("nan")
    T = _truncation_lag(rho)
    ess = m * n / (1.0 + 2.0 * rho[:T].sum())
    if not ess > 0:
        # 1 + 2 sum(rho) <= 0: antithetic beyond the cap
        return float(m * n)
    return float(min(ess, m * n))


def _paired(y, y_hat, min_len):
    y = np.asarray(y, dtype=float).ravel()
    y_hat = np.asarray(y_hat, dtype=float).ravel()
    if y.shape != y_hat.shape:
        raise ConfigError(f"length mismatch: {y.size} observations, {y_hat.size} predictions")
    if y.size < min_len:
        raise ConfigError(f"need at least {min_len} observations")
    return y, y_hat


def r_squared(y, y_hat) -> float:
    """``1 - SS_res / SS_tot``; NaN with a warning when ``y`` is constant."""
    y, y_hat = _paired(y, y_hat, 2)
    ss_tot = np.sum((y - y.mean()) ** 2)
    if ss_tot == 0:
        warnings.warn("constant observations: R^2 undefined", UndefinedMetricWarning, stacklevel=2)
        return float("nan")
    return float(1.0 - np.sum((y - y_hat) ** 2) / ss_tot)


def rmse(y, y_hat) -> float:
    y, y_hat = _paired(y, y_hat, 1)
    return float(np.sqrt(np.mean((y_hat - y) ** 2)))


def predict_counts(w, data: GroupedCountDataset) -> np.ndarray:
    """``exp(x_ij . w_j)`` in the dataset's (group-contiguous) row order."""
    w = np.asarray(w, dtype=float)
    if w.shape != (data.n_groups, data.n_covariates):
        raise ConfigError(f"w has shape {w.shape}, data needs {(data.n_groups, data.n_covariates)}")
    return np.exp(np.einsum("ik,ik->i", data.x, w[data.group_index]))


def posterior_predictive_fit(output: ChainOutput, data: GroupedCountDataset) -> tuple[float, float]:
    """``(R^2, RMSE)`` of predictions at the posterior-mean coefficients.

    The point estimate is ``w_bar`` averaged over every retained draw of every
    chain; predictions are ``exp(x . w_bar_j)``.
    """
    if output.w.shape[0] == 0 or output.w.shape[1] == 0:
        raise ConfigError("output has no retained draws")
    y_hat = predict_counts(output.posterior_mean_w(), data)
    return r_squared(data.y, y_hat), rmse(data.y, y_hat)


@dataclass(frozen=True)
class Characteristics:
    """Count summaries: size, range and percentages of zero / small counts."""

    n_d: int
    rg: tuple[int, int]
    pct0: float
    pct15: float


def characteristics(data) -> Characteristics:
    """Summaries of a dataset or a raw count vector (zeros allowed)."""
    y = np.asarray(data.y if isinstance(data, GroupedCountDataset) else data).ravel()
    if y.size == 0:
        raise ConfigError("no counts to summarise")
    n = y.size
    return Characteristics(
        n_d=int(n),
        rg=(int(y.min()), int(y.max())),
        pct0=100.0 * np.count_nonzero(y == 0) / n,
        pct15=100.0 * np.count_nonzero((y >= 1) & (y <= 5)) / n,
    )


@dataclass
class DiagnosticsReport:
    """Everything one diagnostics row reports for a (dataset, sampler) run.

    ``e_s = mean_ess / t_s``; ``mean_ess`` averages over all ``J K + 2 K``
    parameters with a defined ESS.
    """

    sampler: str
    ess: dict[str, float]
    mean_ess: float
    t_s: float
    e_s: float
    r2: float
    rmse: float
    characteristics: Characteristics
    n_groups: int
    n_covariates: int
    extras: dict = field(default_factory=dict)

    @property
    def n_d(self) -> int:
        return self.characteristics.n_d


def diagnostics_report(output: ChainOutput, data: GroupedCountDataset) -> DiagnosticsReport:
    ess = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UndefinedMetricWarning)
        for name, draws in output.parameter_samples().items():
            ess[name] = effective_sample_size(draws) if output.n_chains >= 2 else float("nan")
    values = np.array(list(ess.values()))
    finite = values[np.isfinite(values)]
    mean_ess = float(finite.mean()) if finite.size else float("nan")
    t_s = output.t_s
    e_s = mean_ess / t_s if t_s > 0 else float("nan")
    r2, err = posterior_predictive_fit(output, data)
    return DiagnosticsReport(
        sampler=output.sampler,
        ess=ess,
        mean_ess=mean_ess,
        t_s=t_s,
        e_s=e_s,
        r2=r2,
        rmse=err,
        characteristics=characteristics(data),
        n_groups=data.n_groups,
        n_covariates=data.n_covariates,
    )
