"""Multi-chain driver shared by the approximate and the exact-likelihood samplers.

Each chain owns one ``numpy.random.Generator`` spawned from the run seed.
Random numbers are drawn from it in blocks (in a fixed order) and handed to a
compiled kernel, so a chain is bit-reproducible from its seed whatever the
number of worker threads.
"""
from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError
from .model import ChainOutput, GroupedCountDataset, ModelState, PriorConfig

logger = logging.getLogger(__name__)

INIT_CHOICES = ("prior-draw", "zeros")


@dataclass
class AgsConfig:
    """Chain settings.

    ``n_warmup`` (N_0) sweeps are discarded and the next ``n_keep`` (N_1) are
    retained in each of ``n_chains`` chains. ``n_jobs`` bounds the number of
    chains run at once (``None`` = one per CPU) and never changes the draws.
    Random numbers are drawn ``block_size`` sweeps at a time; the block size
    fixes how the stream is laid out, so it is part of what makes a run
    reproducible.
    """

    n_warmup: int = 5000
    n_keep: int = 5000
    n_chains: int = 4
    seed: int = 0
    init: str = "prior-draw"
    n_jobs: int | None = 1
    block_size: int = 500

    def __post_init__(self):
        self.validate()

    def validate(self):
        if int(self.n_warmup) != self.n_warmup or self.n_warmup < 0:
            raise ConfigError(f"n_warmup must be a non-negative integer, got {self.n_warmup}")
        if int(self.n_keep) != self.n_keep or self.n_keep < 1:
            raise ConfigError(f"n_keep must be a positive integer, got {self.n_keep}")
        if int(self.n_chains) != self.n_chains or self.n_chains < 1:
            raise ConfigError(f"n_chains must be a positive integer, got {self.n_chains}")
        if self.init not in INIT_CHOICES:
            raise ConfigError(f"init must be one of {INIT_CHOICES}, got {self.init!r}")
        if self.n_jobs is not None and self.n_jobs < 1:
            raise ConfigError("n_jobs must be None or >= 1")
        if self.block_size < 1:
            raise ConfigError("block_size must be >= 1")

    @property
    def iterations(self) -> int:
        return self.n_warmup + self.n_keep


def chain_generators(seed: int, n_chains: int) -> list[np.random.Generator]:
    """Independent per-chain generators derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(n_chains)
    return [np.random.default_rng(c) for c in children]


def initial_state(
    n_groups: int, n_covariates: int, prior: PriorConfig, init: str, rng: np.random.Generator
) -> ModelState:
    """Starting point of a chain.

    ``prior-draw``: ``mu_k ~ N(m, tau2)``, ``sigma2_k ~ IG(a, b)``,
    ``w_jk ~ N(mu_k, sigma2_k)`` (over-dispersed starts for multi-chain
    diagnostics). ``zeros``: ``w = 0``, ``mu = 0``, ``sigma2 = 1``.
    """
    if init == "zeros":
        return ModelState(
            np.zeros((n_groups, n_covariates)), np.zeros(n_covariates), np.ones(n_covariates)
        )
    if init != "prior-draw":
        raise ConfigError(f"unknown init {init!r}")
    mu = prior.m + np.sqrt(prior.tau2) * rng.standard_normal(n_covariates)
    sigma2 = prior.b / rng.standard_gamma(prior.a, n_covariates)
    w = mu + np.sqrt(sigma2) * rng.standard_normal((n_groups, n_covariates))
    return ModelState(w, mu, sigma2)


@dataclass
class SweepRandoms:
    """Pre-drawn randomness for a block of sweeps."""

    z_mu: np.ndarray  # (B, K) standard normals for mu_k
    g_sigma: np.ndarray  # (B, K) Gamma((a + J) / 2, 1) variates for sigma2_k
    z_w: np.ndarray  # (B, J, K) standard normals for the coefficients
    u: np.ndarray | None = None  # (B, J, K) uniforms (Metropolis steps only)

    @classmethod
    def empty(cls, n_groups, n_covariates, uniforms=False):
        z = np.zeros((0, n_groups, n_covariates))
        return cls(np.zeros((0, n_covariates)), np.ones((0, n_covariates)), z, z.copy() if uniforms else None)

    @classmethod
    def draw(cls, rng, n_sweeps, n_groups, n_covariates, prior, uniforms=False):
        z_mu = rng.standard_normal((n_sweeps, n_covariates))
        g = rng.standard_gamma(0.5 * (prior.a + n_groups), (n_sweeps, n_covariates))
        z_w = rng.standard_normal((n_sweeps, n_groups, n_covariates))
        u = rng.random((n_sweeps, n_groups, n_covariates)) if uniforms else None
        return cls(z_mu, g, z_w, u)


class ChainKernel:
    """One sampler's compiled per-block update, bound to a dataset.

    Subclasses set up dataset-derived arrays in ``__init__`` and implement
    :meth:`run_block`, which advances ``state`` in place through
    ``randoms``-many sweeps and writes retained sweeps into ``out``.
    """

    name = "kernel"
    uses_uniforms = False

    def new_chain(self, state: ModelState) -> dict:
        return {}

    def run_block(self, state, chain, randoms, it0, out):  # pragma: no cover - interface
        raise NotImplementedError

    def chain_stats(self, chain: dict) -> dict:
        return {}


def run_chains(
    data: GroupedCountDataset,
    prior: PriorConfig,
    config: AgsConfig,
    kernel: ChainKernel,
) -> ChainOutput:
    J, K = data.n_groups, data.n_covariates
    n_keep = config.n_keep
    rngs = chain_generators(config.seed, config.n_chains)

    def one_chain(c: int):
        rng = rngs[c]
        state = initial_state(J, K, prior, config.init, rng)
        chain = kernel.new_chain(state)
        out = {
            "w": np.empty((n_keep, J, K)),
            "mu": np.empty((n_keep, K)),
            "sigma2": np.empty((n_keep, K)),
        }
        total = config.iterations
        # zero-length block: triggers JIT compilation outside the timed loop
        kernel.run_block(state, chain, SweepRandoms.empty(J, K, kernel.uses_uniforms), 0, out)
        t0 = time.perf_counter()
        it = 0
        while it < total:
            b = min(config.block_size, total - it)
            if it < config.n_warmup:
                # blocks never straddle the end of warm-up
                b = min(b, config.n_warmup - it)
            randoms = SweepRandoms.draw(rng, b, J, K, prior, uniforms=kernel.uses_uniforms)
            kernel.run_block(state, chain, randoms, it, out)
            it += b
        elapsed = time.perf_counter() - t0
        logger.debug("%s chain %d: %.3f s for %d sweeps", kernel.name, c + 1, elapsed, total)
        return out, elapsed, kernel.chain_stats(chain)

    n_jobs = config.n_jobs or os.cpu_count() or 1
    n_jobs = min(n_jobs, config.n_chains)
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(one_chain, range(config.n_chains)))
    else:
        results = [one_chain(c) for c in range(config.n_chains)]

    stats: dict = {}
    for _, _, s in results:
        for key, val in s.items():
            stats.setdefault(key, []).append(val)
    stats = {key: np.asarray(val) for key, val in stats.items()}

    return ChainOutput(
        w=np.stack([r[0]["w"] for r in results]),
        mu=np.stack([r[0]["mu"] for r in results]),
        sigma2=np.stack([r[0]["sigma2"] for r in results]),
        warmup_count=config.n_warmup,
        retained_count=n_keep,
        chain_seconds=np.array([r[1] for r in results]),
        sampler=kernel.name,
        stats=stats,
    )


def validate_inputs(data: GroupedCountDataset, prior: PriorConfig, config: AgsConfig) -> None:
    if not isinstance(data, GroupedCountDataset):
        raise ConfigError("data must be a GroupedCountDataset")
    if not isinstance(prior, PriorConfig):
        raise ConfigError("prior must be a PriorConfig")
    config.validate()
    data.check_positive()

