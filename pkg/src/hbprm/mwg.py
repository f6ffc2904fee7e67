"""Exact-likelihood Metropolis-within-Gibbs reference sampler.

Hyperparameters use the same conjugate draws as the approximate sampler; each
``w_jk`` takes one Gaussian random-walk Metropolis step targeting

    log p(w_jk | -) = sum_i [y_ij eta_ij - exp(eta_ij)] - (w_jk - mu_k)^2 / (2 sigma2_k) + C.

Per-coefficient step sizes adapt during warm-up only (Robbins-Monro on the
log step toward ``adapt_target``) and are frozen for the retained sweeps.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import exp, log, sqrt

import numpy as np
from numba import njit

from ._chains import AgsConfig, ChainKernel, SweepRandoms, run_chains, validate_inputs
from .conjugate import _mu_posterior, _sigma2_posterior
from .exceptions import ConfigError
from .model import ChainOutput, GroupedCountDataset, ModelState, PriorConfig

__all__ = ["MwgConfig", "mwg_coefficient_step", "run_mwg"]


@dataclass
class MwgConfig(AgsConfig):
    """:class:`AgsConfig` plus random-walk tuning.

    ``step_scale`` is the initial proposal sd; during warm-up the log step of
    each coefficient moves by ``(accepted - adapt_target) * gain`` with
    ``gain = (1 + t / adapt_window) ** -0.6`` at warm-up sweep ``t``.
    """

    step_scale: float = 0.1
    adapt_target: float = 0.44
    adapt_window: int = 50

    def validate(self):
        super().validate()
        if not self.step_scale > 0:
            raise ConfigError(f"step_scale must be positive, got {self.step_scale}")
        if not 0 < self.adapt_target < 1:
            raise ConfigError(f"adapt_target must be in (0, 1), got {self.adapt_target}")
        if self.adapt_window < 1:
            raise ConfigError("adapt_window must be >= 1")


@njit(cache=True, nogil=True)
def _log_target_delta(xk, y, eta, lo, hi, w_old, w_new, mu_k, sigma2_k):
    """Log conditional at ``w_new`` minus at ``w_old`` (constants dropped).

    ``xk`` is covariate ``k`` over all observations.
    """
    cur = 0.0
    prop = 0.0
    d = w_new - w_old
    for i in range(lo, hi):
        e = eta[i]
        e_new = e + xk[i] * d
        cur += y[i] * e - exp(e)
        prop += y[i] * e_new - exp(e_new)
    cur -= 0.5 * (w_old - mu_k) ** 2 / sigma2_k
    prop -= 0.5 * (w_new - mu_k) ** 2 / sigma2_k
    return prop - cur


@njit(cache=True, nogil=True)
def _mwg_block(
    xT, y, offsets,
    w, mu, sigma2, eta, log_step, n_accept,
    m, tau2, a, b,
    z_mu, g_sigma, z_w, u,
    it0, n_warmup, adapt_target, adapt_window,
    out_w, out_mu, out_sigma2,
):  # fmt: skip
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
        it = it0 + t
        warm = it < n_warmup
        gain = (1.0 + it / adapt_window) ** -0.6
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

            xk = xT[k]
            for j in range(J):
                lo, hi = offsets[j], offsets[j + 1]
                w_old = w[j, k]
                w_new = w_old + exp(log_step[j, k]) * z_w[t, j, k]
                delta = _log_target_delta(xk, y, eta, lo, hi, w_old, w_new, mu[k], sigma2[k])
                # NaN (both points overflow) rejects
                accepted = log(u[t, j, k]) < delta
                if accepted:
                    w[j, k] = w_new
                    dw = w_new - w_old
                    for i in range(lo, hi):
                        eta[i] += xk[i] * dw
                if warm:
                    log_step[j, k] += gain * ((1.0 if accepted else 0.0) - adapt_target)
                elif accepted:
                    n_accept[j, k] += 1
        r = it - n_warmup
        if r >= 0:
            out_w[r] = w
            out_mu[r] = mu
            out_sigma2[r] = sigma2


class MwgKernel(ChainKernel):
    name = "mwg"
    uses_uniforms = True

    def __init__(self, data: GroupedCountDataset, prior: PriorConfig, config: MwgConfig):
        self.prior = prior
        self.config = config
        self.xT = np.ascontiguousarray(np.asarray(data.x, dtype=float).T)
        self.y = np.ascontiguousarray(data.y, dtype=float)
        self.offsets = np.asarray(data.offsets, dtype=np.int64)
        self.shape = (data.n_groups, data.n_covariates)

    def new_chain(self, state):
        return {
            "eta": np.empty(self.xT.shape[1]),
            "log_step": np.full(self.shape, np.log(self.config.step_scale)),
            "n_accept": np.zeros(self.shape, dtype=np.int64),
            "step_after_warmup": None,
        }

    def run_block(self, state, chain, randoms: SweepRandoms, it0, out):
        p, c = self.prior, self.config
        if chain["step_after_warmup"] is None and it0 >= c.n_warmup and randoms.z_mu.shape[0]:
            chain["step_after_warmup"] = np.exp(chain["log_step"])
        _mwg_block(
            self.xT, self.y, self.offsets,
            state.w, state.mu, state.sigma2, chain["eta"], chain["log_step"], chain["n_accept"],
            float(p.m), float(p.tau2), float(p.a), float(p.b),
            randoms.z_mu, randoms.g_sigma, randoms.z_w, randoms.u,
            it0, c.n_warmup, float(c.adapt_target), float(c.adapt_window),
            out["w"], out["mu"], out["sigma2"],
        )  # fmt: skip

    def chain_stats(self, chain):
        rate = chain["n_accept"] / self.config.n_keep
        return {
            "accept_rate": float(rate.mean()),
            "accept_rate_jk": rate,
            "step_after_warmup": chain["step_after_warmup"],
            "step_final": np.exp(chain["log_step"]),
        }


def mwg_coefficient_step(
    j: int,
    k: int,
    state: ModelState,
    data: GroupedCountDataset,
    prior: PriorConfig,
    config: MwgConfig,
    rng: np.random.Generator,
    step: float | None = None,
) -> tuple[float, bool]:
    """One random-walk Metropolis update of ``w_jk``; ``state`` is not modified.

    ``prior`` is accepted for signature symmetry with the sweep; the
    coefficient conditional depends only on ``mu_k`` and ``sigma2_k``.
    """
    state.check_matches(data)
    if not (0 <= j < data.n_groups and 0 <= k < data.n_covariates):
        raise IndexError(f"(j, k) = ({j}, {k}) out of range")
    step = config.step_scale if step is None else step
    x = np.asarray(data.x, dtype=float)
    eta = np.einsum("ik,ik->i", x, state.w[data.group_index])
    w_old = float(state.w[j, k])
    w_new = w_old + step * rng.standard_normal()
    delta = _log_target_delta(
        np.ascontiguousarray(x[:, k]), np.asarray(data.y, dtype=float), eta,
        data.offsets[j], data.offsets[j + 1],
        w_old, w_new, float(state.mu[k]), float(state.sigma2[k]),
    )  # fmt: skip
    accepted = bool(np.log(rng.random()) < delta)
    return (w_new if accepted else w_old), accepted


def run_mwg(
    data: GroupedCountDataset, prior: PriorConfig | None = None, config: MwgConfig | None = None
) -> ChainOutput:
    """Run ``config.n_chains`` independent Metropolis-within-Gibbs chains.

    ``output.stats`` holds per-chain post-warm-up acceptance rates and the
    step sizes at the end of warm-up and at the end of the run (equal, since
    adaptation stops after warm-up).
    """
    prior = PriorConfig() if prior is None else prior
    config = MwgConfig() if config is None else config
    if not isinstance(config, MwgConfig):
        raise ConfigError("config must be an MwgConfig")
    validate_inputs(data, prior, config)
    return run_chains(data, prior, config, MwgKernel(data, prior, config))
