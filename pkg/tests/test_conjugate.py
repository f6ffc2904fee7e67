import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hbprm.conjugate import (
    GaussianParams,
    InvGammaParams,
    draw_gaussian,
    draw_inverse_gamma,
    mu_conditional,
    sigma2_conditional,
)
from hbprm.exceptions import DomainError
from hbprm.model import PriorConfig


@pytest.mark.parametrize(
    "prior, s2, w, mean, var",
    [
        (PriorConfig(0, 1), 1.0, [0.0], 0.0, 0.5),
        (PriorConfig(0, 1), 1.0, [2.0], 1.0, 0.5),
        (PriorConfig(1, 4), 2.0, [1.0, 3.0], 1.8, 0.8),
    ],
)
def test_mu_conditional_examples(prior, s2, w, mean, var):
    p = mu_conditional(w, s2, prior)
    assert p.mean == pytest.approx(mean)
    assert p.variance == pytest.approx(var)


@pytest.mark.parametrize(
    "a, b, w, mu, shape, scale",
    [
        (2, 2, [0.7], 0.7, 1.5, 1.0),
        (2, 2, [1.0, 3.0], 2.0, 2.0, 2.0),
        (1, 1, [0.0, 0.0, 0.0], 1.0, 2.0, 2.0),
    ],
)
def test_sigma2_conditional_examples(a, b, w, mu, shape, scale):
    p = sigma2_conditional(w, mu, PriorConfig(a=a, b=b))
    assert p.shape == pytest.approx(shape)
    assert p.scale == pytest.approx(scale)


def test_mu_conditional_rejects_bad_sigma2():
    with pytest.raises(DomainError):
        mu_conditional([1.0], 0.0, PriorConfig())


def test_params_validation():
    with pytest.raises(DomainError):
        GaussianParams(0.0, 0.0)
    with pytest.raises(DomainError):
        InvGammaParams(1.0, -1.0)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=20), st.floats(0.1, 5))
def test_flat_prior_limit(w, s2):
    p = mu_conditional(w, s2, PriorConfig(tau2=1e12))
    assert p.mean == pytest.approx(np.mean(w), abs=1e-6)
    assert p.variance == pytest.approx(s2 / len(w), rel=1e-6)


@given(st.permutations([0.3, -1.0, 2.2, 0.1, 5.0]), st.floats(-2, 2))
def test_sigma2_scale_permutation_invariant(w, mu):
    base = sigma2_conditional([0.3, -1.0, 2.2, 0.1, 5.0], mu, PriorConfig())
    assert sigma2_conditional(w, mu, PriorConfig()).scale == pytest.approx(base.scale)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=10))
def test_doubling_groups_doubles_shape_increment(w):
    prior = PriorConfig(a=3.0)
    one = sigma2_conditional(w, 0.0, prior)
    two = sigma2_conditional(w + w, 0.0, prior)
    assert two.shape - prior.a / 2 == pytest.approx(2 * (one.shape - prior.a / 2))


def test_degenerate_gaussian(rng):
    draws = draw_gaussian(GaussianParams(2.5, 1e-12), rng, size=100)
    np.testing.assert_allclose(draws, 2.5, atol=1e-4)


def test_gaussian_draw_mean(rng):
    draws = draw_gaussian(GaussianParams(0.0, 1.0), rng, size=100_000)
    assert abs(draws.mean()) < 4 / np.sqrt(100_000)


def test_inverse_gamma_draw_mean(rng):
    draws = draw_inverse_gamma(InvGammaParams(3.0, 2.0), rng, size=100_000)
    # variance of IG(3, 2) is 2^2 / ((3-1)^2 (3-2)) = 1
    assert abs(draws.mean() - 1.0) < 3 * np.sqrt(1.0 / 100_000)
    assert np.all(draws > 0)
