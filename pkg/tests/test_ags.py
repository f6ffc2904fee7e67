import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbprm.ags import AgsConfig, ags_sweep, coefficient_conditional, run_ags
from hbprm.diagnostics import effective_sample_size
from hbprm.exceptions import ConfigError, DataError
from hbprm.model import GroupedCountDataset, ModelState, PriorConfig
from hbprm.special import psi0, psi1
from hbprm.synth import generate_poisson

from .oracles import (
    approx_conditional_info_form,
    exact_conditional_logpdf,
    grid_moments,
)


def _dataset(rng, J=3, n=8, K=2):
    x = rng.uniform(-1, 1, size=(J * n, K))
    y = rng.integers(1, 60, size=J * n)
    return GroupedCountDataset(x, y, np.repeat(np.arange(J), n))


def _state(rng, J, K):
    return ModelState(rng.normal(size=(J, K)), rng.normal(size=K), rng.uniform(0.2, 2, size=K))


def test_zero_covariate_recovers_prior():
    data = GroupedCountDataset(np.zeros((4, 1)), [3, 5, 1, 9], [0] * 4)
    state = ModelState(np.array([[0.4]]), np.array([1.3]), np.array([0.7]))
    c = coefficient_conditional(0, 0, state, data)
    assert c.mean_hat == pytest.approx(1.3)
    assert c.var_hat == pytest.approx(0.7)


def test_single_observation_hand_value():
    data = GroupedCountDataset([[1.0]], [1], [0])
    state = ModelState(np.zeros((1, 1)), np.zeros(1), np.ones(1))
    c = coefficient_conditional(0, 0, state, data)
    denom = 1 / psi1(1) + 1
    assert denom == pytest.approx(1.60793, abs=1e-5)
    assert c.var_hat == pytest.approx(1 / denom, rel=1e-12)
    assert c.var_hat == pytest.approx(0.62193, abs=5e-5)
    assert c.mean_hat == pytest.approx(psi0(1) / psi1(1) / denom, rel=1e-12)
    assert c.mean_hat == pytest.approx(-0.21823, abs=1e-5)


def test_matches_information_form_oracle(rng):
    data = _dataset(rng)
    state = _state(rng, 3, 2)
    for j in range(3):
        for k in range(2):
            x, y = data.group(j)
            others = x @ state.w[j] - x[:, k] * state.w[j, k]
            mean, var = approx_conditional_info_form(x[:, k], y, others, state.mu[k], state.sigma2[k])
            c = coefficient_conditional(j, k, state, data)
            assert c.mean_hat == pytest.approx(mean, rel=1e-10)
            assert c.var_hat == pytest.approx(var, rel=1e-10)


def test_matches_grid_normalised_gaussian_product(rng):
    # brute-force: normalise prior x prod of Gaussian factors on a grid
    data = _dataset(rng, J=1, n=6, K=1)
    state = ModelState(np.array([[0.2]]), np.array([0.5]), np.array([0.8]))
    x, y = data.group(0)
    p0 = np.array([psi0(v) for v in y])
    p1 = np.array([psi1(v) for v in y])

    def logp(w):
        resid = p0[None, :] - np.outer(w, x[:, 0])
        return -np.sum(resid**2 / (2 * p1), axis=1) - (w - 0.5) ** 2 / 1.6

    c = coefficient_conditional(0, 0, state, data)
    mean, sd = grid_moments(logp, c.mean_hat, 12 * math.sqrt(c.var_hat))
    assert c.mean_hat == pytest.approx(mean, abs=1e-8)
    assert math.sqrt(c.var_hat) == pytest.approx(sd, rel=1e-6)


@given(st.integers(0, 10_000))
def test_variance_never_exceeds_prior(seed):
    rng = np.random.default_rng(seed)
    data = _dataset(rng)
    state = _state(rng, 3, 2)
    c = coefficient_conditional(1, 1, state, data)
    assert 0 < c.var_hat <= state.sigma2[1]


@given(st.permutations(list(range(8))))
def test_order_invariance(perm):
    rng = np.random.default_rng(7)
    x = rng.uniform(0, 1, size=(8, 2))
    y = rng.integers(1, 30, size=8)
    state = _state(rng, 1, 2)
    base = coefficient_conditional(0, 1, state, GroupedCountDataset(x, y, [0] * 8))
    p = np.array(perm)
    shuffled = coefficient_conditional(0, 1, state, GroupedCountDataset(x[p], y[p], [0] * 8))
    assert shuffled.mean_hat == pytest.approx(base.mean_hat, rel=1e-12)
    assert shuffled.var_hat == pytest.approx(base.var_hat, rel=1e-12)


@given(st.floats(0.1, 5), st.integers(1, 500), st.floats(-3, 3), st.floats(0.05, 5))
def test_single_observation_shrinkage(x, y, mu, s2):
    data = GroupedCountDataset([[x]], [y], [0])
    state = ModelState(np.zeros((1, 1)), np.array([mu]), np.array([s2]))
    c = coefficient_conditional(0, 0, state, data)
    lo, hi = sorted([mu, psi0(y) / x])
    assert lo - 1e-9 <= c.mean_hat <= hi + 1e-9


def test_zero_count_rejected():
    data = GroupedCountDataset([[1.0], [1.0]], [0, 2], [0, 0], require_positive=False)
    state = ModelState(np.zeros((1, 1)), np.zeros(1), np.ones(1))
    with pytest.raises(DataError):
        coefficient_conditional(0, 0, state, data)
    with pytest.raises(DataError):
        run_ags(data, config=AgsConfig(0, 1, 1))


def test_index_errors(rng):
    data = _dataset(rng)
    with pytest.raises(IndexError):
        coefficient_conditional(3, 0, _state(rng, 3, 2), data)


@pytest.mark.parametrize("n_obs", [5, 20])
def test_close_to_exact_conditional_for_large_counts(n_obs):
    rng = np.random.default_rng(n_obs)
    x = rng.uniform(0.8, 1.5, size=n_obs)
    y = rng.poisson(np.exp(4.0 * x))
    assert y.min() >= 10
    data = GroupedCountDataset(x[:, None], y, [0] * n_obs)
    state = ModelState(np.array([[0.0]]), np.array([0.0]), np.array([1.0]))
    c = coefficient_conditional(0, 0, state, data)
    logp = exact_conditional_logpdf(x, y, np.zeros(n_obs), 0.0, 1.0)
    mean, sd = grid_moments(logp, c.mean_hat, 8 * math.sqrt(c.var_hat))
    assert abs(c.mean_hat - mean) < 0.1 * sd
    assert abs(math.sqrt(c.var_hat) - sd) < 0.1 * sd


def test_sweep_changes_every_parameter(rng):
    data = _dataset(rng)
    state = _state(rng, 3, 2)
    new = ags_sweep(state, data, PriorConfig(), None, np.random.default_rng(1))
    assert np.all(new.w != state.w) and np.all(new.mu != state.mu)
    assert np.all(new.sigma2 != state.sigma2)
    assert new.w.shape == (3, 2) and new.mu.shape == (2,) and new.sigma2.shape == (2,)


def test_sweep_does_not_mutate_input(rng):
    data = _dataset(rng)
    state = _state(rng, 3, 2)
    before = state.copy()
    ags_sweep(state, data, PriorConfig(), None, np.random.default_rng(1))
    np.testing.assert_array_equal(state.w, before.w)


def test_sweep_matches_reference_order(rng):
    # replay the same random numbers through a plain-numpy sweep:
    # per covariate mu, then sigma2, then each w_jk
    data = _dataset(rng)
    state = _state(rng, 3, 2)
    prior = PriorConfig(m=0.3, tau2=2.0, a=2.0, b=1.5)
    new = ags_sweep(state, data, prior, None, np.random.default_rng(5))

    r = np.random.default_rng(5)
    J, K = 3, 2
    z_mu = r.standard_normal((1, K))[0]
    g = r.standard_gamma(0.5 * (prior.a + J), (1, K))[0]
    z_w = r.standard_normal((1, J, K))[0]
    w, mu, s2 = state.w.copy(), state.mu.copy(), state.sigma2.copy()
    for k in range(K):
        prec = 1 / prior.tau2 + J / s2[k]
        mu[k] = (prior.m / prior.tau2 + w[:, k].sum() / s2[k]) / prec + z_mu[k] / math.sqrt(prec)
        s2[k] = 0.5 * (prior.b + np.sum((w[:, k] - mu[k]) ** 2)) / g[k]
        for j in range(J):
            x, y = data.group(j)
            others = x @ w[j] - x[:, k] * w[j, k]
            mean, var = approx_conditional_info_form(x[:, k], y, others, mu[k], s2[k])
            w[j, k] = mean + math.sqrt(var) * z_w[j, k]
    np.testing.assert_allclose(new.mu, mu, rtol=1e-10)
    np.testing.assert_allclose(new.sigma2, s2, rtol=1e-10)
    np.testing.assert_allclose(new.w, w, rtol=1e-9, atol=1e-12)


def test_run_is_deterministic_and_thread_count_independent():
    # block_size is part of the stream layout; worker count is not
    data = generate_poisson(3, 10, np.array([[2.0, 0.3]] * 3), seed=2)
    data = data.shifted(1)
    cfg = dict(n_warmup=50, n_keep=40, n_chains=3, seed=9)
    a = run_ags(data, config=AgsConfig(**cfg))
    b = run_ags(data, config=AgsConfig(**cfg))
    c = run_ags(data, config=AgsConfig(**cfg, n_jobs=3))
    for other in (b, c):
        np.testing.assert_array_equal(a.w, other.w)
        np.testing.assert_array_equal(a.mu, other.mu)
        np.testing.assert_array_equal(a.sigma2, other.sigma2)
    d = run_ags(data, config=AgsConfig(**{**cfg, "seed": 10}))
    assert not np.array_equal(a.w, d.w)


def test_chains_differ_from_each_other():
    data = generate_poisson(2, 10, np.array([[2.0, 0.3]] * 2), seed=2).shifted(1)
    out = run_ags(data, config=AgsConfig(10, 10, 2, seed=0))
    assert not np.array_equal(out.w[0], out.w[1])


def test_boundary_single_retained_state():
    data = GroupedCountDataset([[1.0], [0.5]], [4, 2], [0, 1])
    out = run_ags(data, config=AgsConfig(n_warmup=0, n_keep=1, n_chains=2))
    assert out.w.shape == (2, 1, 2, 1)
    assert out.retained_count == 1 and out.warmup_count == 0
    assert np.all(out.chain_seconds >= 0)


def test_zero_covariates_sample_prior_predictive():
    # with x = 0 the data carry no information: w_11 follows mu + sigma t-noise
    # around m, so its long-run mean matches m
    data = GroupedCountDataset(np.zeros((5, 1)), [2, 4, 1, 7, 3], [0] * 5)
    prior = PriorConfig(m=0.5, tau2=1.0, a=6.0, b=6.0)
    out = run_ags(data, prior, AgsConfig(n_warmup=1000, n_keep=20_000, n_chains=4, seed=3))
    draws = out.w[:, :, 0, 0]
    se = draws.std() / math.sqrt(effective_sample_size(draws))
    assert abs(draws.mean() - prior.m) < 3 * se


@pytest.mark.parametrize(
    "kw", [dict(n_keep=0), dict(n_warmup=-1), dict(n_chains=0), dict(init="bad"), dict(n_jobs=0)]
)
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        AgsConfig(**kw)


def test_zeros_init():
    data = GroupedCountDataset([[1.0]], [3], [0])
    out = run_ags(data, config=AgsConfig(0, 3, 2, init="zeros"))
    assert out.w.shape == (2, 3, 1, 1)
