"""Approximate Gibbs sampler.

Each Poisson factor ``Pois(y | exp(eta))``, viewed as a function of ``eta``, is
proportional to the log-gamma density ``exp(eta y - e^eta)``. Replacing it by
the Gaussian ``N(eta | psi0(y), psi1(y))`` makes the coefficient conditional
Gaussian:

    denom    = sigma2_k * sum_i x_ijk^2 / psi1(y_ij) + 1
    var_hat  = sigma2_k / denom
    mean_hat = (mu_k + sigma2_k * sum_i x_ijk / psi1(y_ij)
                       * (psi0(y_ij) - sum_{h != k} x_ijh w_jh)) / denom

A sweep visits covariates in order; for covariate ``k`` it draws ``mu_k``,
then ``sigma2_k``, then ``w_1k .. w_Jk``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np
from numba import njit

from ._chains import AgsConfig, ChainKernel, SweepRandoms, run_chains, validate_inputs
from .conjugate import _mu_posterior, _sigma2_posterior
from .exceptions import ConfigError, DataError
from .model import ChainOutput, GroupedCountDataset, ModelState, PriorConfig
from .special import PolygammaTable

__all__ = [
    "AgsConfig",
    "CoefficientConditional",
    "coefficient_conditional",
    "ags_sweep",
    "run_ags",
]


@dataclass(frozen=True)
class CoefficientConditional:
    """Approximate Gaussian conditional of ``w_jk`` (0-based ``j``, ``k``)."""

    mean_hat: float
    var_hat: float
    j: int
    k: int


def coefficient_conditional(
    j: int,
    k: int,
    state: ModelState,
    data: GroupedCountDataset,
    psi_table: PolygammaTable | None = None,
) -> CoefficientConditional:
    """Closed-form approximate conditional of ``w_jk`` given everything else."""
    state.check_matches(data)
    if not (0 <= j < data.n_groups and 0 <= k < data.n_covariates):
        raise IndexError(f"(j, k) = ({j}, {k}) out of range")
    x, y = data.group(j)
    if np.any(y < 1):
        raise DataError(f"group {j + 1} contains a zero count")
    if psi_table is None:
        psi_table = PolygammaTable.for_counts(y)
    p0, p1 = psi_table.psi0(y), psi_table.psi1(y)
    s2 = state.sigma2[k]
    others = x @ state.w[j] - x[:, k] * state.w[j, k]
    denom = s2 * np.sum(x[:, k] ** 2 / p1) + 1.0
    mean = (state.mu[k] + s2 * np.sum(x[:, k] / p1 * (p0 - others))) / denom
    return CoefficientConditional(float(mean), float(s2 / denom), j, k)


@njit(cache=True, nogil=True)
def _ags_block(
    xT, offsets, psi0, xT_over_psi1, sum_x2_over_psi1,
    w, mu, sigma2, eta,
    m, tau2, a, b,
    z_mu, g_sigma, z_w,
    it0, n_warmup, out_w, out_mu, out_sigma2,
):  # fmt: skip
    # covariate-major layout: xT[k] is covariate k over all observations
    n_sweeps = z_mu.shape[0]
    J, K = w.shape
    # recomputed once per block (bounds rounding drift), then kept
    # current incrementally as each coefficient moves
    for j in range(J):
        lo, hi = offsets[j], offsets[j + 1]
        for i in range(lo, hi):
            eta[i] = 0.0
        for h in range(K):
            wh = w[j, h]
            for i in range(lo, hi):
                eta[i] += xT[h, i] * wh
    for t in range(n_sweeps):
        for k in range(K):
            sum_w = 0.0
            for j in range(J):
                sum_w += w[j, k]
            mean, var = _mu_posterior(m, tau2, J, sum_w, sigma2[k])
            mu[k] = mean + sqrt(var) * z_mu[t, k]

            sum_sq = 0.0
            for j in range(J):
                d = w[j, k] - mu[k]
                sum_sq += d * d
            _, scale = _sigma2_posterior(a, b, J, sum_sq)
            sigma2[k] = scale / g_sigma[t, k]
            s2 = sigma2[k]

            xk = xT[k]
            xpk = xT_over_psi1[k]
            for j in range(J):
                lo, hi = offsets[j], offsets[j + 1]
                w_old = w[j, k]
                acc = 0.0
                for i in range(lo, hi):
                    acc += xpk[i] * (psi0[i] - eta[i] + xk[i] * w_old)
                denom = s2 * sum_x2_over_psi1[j, k] + 1.0
                w_new = (mu[k] + s2 * acc) / denom + sqrt(s2 / denom) * z_w[t, j, k]
                w[j, k] = w_new
                delta = w_new - w_old
                for i in range(lo, hi):
                    eta[i] += xk[i] * delta
        r = it0 + t - n_warmup
        if r >= 0:
            out_w[r] = w
            out_mu[r] = mu
            out_sigma2[r] = sigma2


class AgsKernel(ChainKernel):
    """Dataset-bound AGS update.

    ``x / psi1(y)`` per observation and ``sum_i x^2 / psi1(y)`` per ``(j, k)``
    are computed once here, stored covariate-major; per sweep only the cross
    terms change.
    """

    name = "ags"

    def __init__(self, data: GroupedCountDataset, prior: PriorConfig, psi_table=None, n_warmup=0):
        self.n_warmup = int(n_warmup)
        if psi_table is None:
            psi_table = PolygammaTable.for_counts(data.y)
        self.data = data
        self.prior = prior
        x = np.asarray(data.x, dtype=float)
        self.xT = np.ascontiguousarray(x.T)
        self.offsets = np.asarray(data.offsets, dtype=np.int64)
        self.psi0 = np.ascontiguousarray(psi_table.psi0(data.y), dtype=float)
        inv_psi1 = 1.0 / psi_table.psi1(data.y)
        self.xT_over_psi1 = np.ascontiguousarray((x * inv_psi1[:, None]).T)
        x2 = x**2 * inv_psi1[:, None]
        self.sum_x2_over_psi1 = np.ascontiguousarray(
            np.add.reduceat(x2, self.offsets[:-1], axis=0)
        )

    def new_chain(self, state):
        return {"eta": np.empty(self.xT.shape[1])}

    def run_block(self, state, chain, randoms: SweepRandoms, it0, out):
        p = self.prior
        _ags_block(
            self.xT, self.offsets, self.psi0, self.xT_over_psi1, self.sum_x2_over_psi1,
            state.w, state.mu, state.sigma2, chain["eta"],
            float(p.m), float(p.tau2), float(p.a), float(p.b),
            randoms.z_mu, randoms.g_sigma, randoms.z_w,
            it0, self.n_warmup, out["w"], out["mu"], out["sigma2"],
        )  # fmt: skip


def ags_sweep(
    state: ModelState,
    data: GroupedCountDataset,
    prior: PriorConfig,
    psi_table: PolygammaTable | None,
    rng: np.random.Generator,
) -> ModelState:
    """One full sweep; returns the updated copy of ``state``."""
    state.check_matches(data)
    data.check_positive()
    kernel = AgsKernel(data, prior, psi_table)
    new = state.copy()
    J, K = data.n_groups, data.n_covariates
    randoms = SweepRandoms.draw(rng, 1, J, K, prior)
    out = {"w": np.empty((1, J, K)), "mu": np.empty((1, K)), "sigma2": np.empty((1, K))}
    kernel.run_block(new, kernel.new_chain(new), randoms, 0, out)
    return new


def run_ags(
    data: GroupedCountDataset, prior: PriorConfig | None = None, config: AgsConfig | None = None
) -> ChainOutput:
    """Run ``config.n_chains`` independent AGS chains."""
    prior = PriorConfig() if prior is None else prior
    config = AgsConfig() if config is None else config
    if not isinstance(config, AgsConfig):
        raise ConfigError("config must be an AgsConfig")
    validate_inputs(data, prior, config)
    kernel = AgsKernel(data, prior, n_warmup=config.n_warmup)
    return run_chains(data, prior, config, kernel)
