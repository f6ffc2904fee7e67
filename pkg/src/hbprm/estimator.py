"""scikit-learn style wrapper around the samplers."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_consistent_length, check_is_fitted

from .ags import run_ags
from .diagnostics import r_squared
from .exceptions import ConfigError
from .model import GroupedCountDataset, PriorConfig
from .mwg import MwgConfig, run_mwg

__all__ = ["HierarchicalPoissonRegressor"]


class HierarchicalPoissonRegressor(RegressorMixin, BaseEstimator):
    """Hierarchical Poisson regression fitted by MCMC.

    Parameters
    ----------
    sampler : {"ags", "mwg"}, default "ags"
        Approximate Gibbs sampler, or the exact-likelihood
        Metropolis-within-Gibbs reference.
    n_warmup, n_keep, n_chains : int
        Warm-up and retained sweeps per chain, and the number of chains.
    m, tau2, a, b : float
        Hyperprior ``mu_k ~ N(m, tau2)``, ``sigma2_k ~ IG(a, b)``.
    seed : int
    init : {"prior-draw", "zeros"}
    n_jobs : int or None
        Chains run concurrently.
    shift_counts : int or None
        Positive integer added to every count before fitting.

    Attributes
    ----------
    coef_ : ndarray, shape (n_groups, n_features)
        Posterior mean of the group coefficients.
    mu_, sigma2_ : ndarray, shape (n_features,)
        Posterior means of the hyperparameters.
    groups_ : tuple
        Group labels in first-appearance order (rows of ``coef_``).
    chains_ : ChainOutput
        Every retained draw.
    n_features_in_ : int
    """

    def __init__(
        self,
        sampler="ags",
        n_warmup=5000,
        n_keep=5000,
        n_chains=4,
        m=0.0,
        tau2=1.0,
        a=1.0,
        b=1.0,
        seed=0,
        init="prior-draw",
        n_jobs=1,
        shift_counts=None,
    ):
        self.sampler = sampler
        self.n_warmup = n_warmup
        self.n_keep = n_keep
        self.n_chains = n_chains
        self.m = m
        self.tau2 = tau2
        self.a = a
        self.b = b
        self.seed = seed
        self.init = init
        self.n_jobs = n_jobs
        self.shift_counts = shift_counts

    def _dataset(self, X, y, groups):
        X = check_array(X, dtype=float)
        y = check_array(y, ensure_2d=False, dtype=None)
        if groups is None:
            groups = np.zeros(X.shape[0], dtype=int)
        groups = np.asarray(groups)
        check_consistent_length(X, y, groups)
        data = GroupedCountDataset(X, y, groups, require_positive=False)
        if self.shift_counts:
            data = data.shifted(self.shift_counts)
        return data

    def fit(self, X, y, groups=None):
        """Sample the posterior.

        ``groups`` gives each row's group label; omitted, all rows form one
        group.
        """
        if self.sampler not in ("ags", "mwg"):
            raise ConfigError(f"sampler must be 'ags' or 'mwg', got {self.sampler!r}")
        data = self._dataset(X, y, groups)
        prior = PriorConfig(m=self.m, tau2=self.tau2, a=self.a, b=self.b)
        config = MwgConfig(
            n_warmup=self.n_warmup,
            n_keep=self.n_keep,
            n_chains=self.n_chains,
            seed=self.seed,
            init=self.init,
            n_jobs=self.n_jobs,
        )
        run = run_ags if self.sampler == "ags" else run_mwg
        self.chains_ = run(data, prior, config)
        self.coef_ = self.chains_.posterior_mean_w()
        self.mu_ = self.chains_.mu.mean(axis=(0, 1))
        self.sigma2_ = self.chains_.sigma2.mean(axis=(0, 1))
        self.groups_ = data.labels
        self.n_features_in_ = data.n_covariates
        return self

    def predict(self, X, groups=None):
        """Expected counts ``exp(x . w_j)``.

        Rows whose group was not seen in :meth:`fit` use the posterior mean
        of ``mu`` as their coefficients.
        """
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ConfigError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        if groups is None:
            groups = np.full(X.shape[0], self.groups_[0], dtype=object)
        groups = np.asarray(groups)
        check_consistent_length(X, groups)
        index = {label: j for j, label in enumerate(self.groups_)}
        coef = np.array([self.coef_[index[g]] if g in index else self.mu_ for g in groups.tolist()])
        return np.exp(np.einsum("ik,ik->i", X, coef.reshape(X.shape)))

    def score(self, X, y, groups=None, sample_weight=None):
        """R^2 of :meth:`predict` against ``y``."""
        if sample_weight is not None:
            raise ConfigError("sample_weight is not supported")
        return r_squared(y, self.predict(X, groups))
