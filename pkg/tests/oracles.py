"""Independent reference computations used by several test modules."""
import math

import numpy as np
from scipy.special import digamma, polygamma


def approx_conditional_info_form(x, y, others, mu_k, sigma2_k):
    """Product of ``N(w | mu_k, sigma2_k)`` and the per-observation Gaussians
    ``N(psi0(y) | others + x w, psi1(y))`` in information form."""
    p0 = digamma(np.asarray(y, dtype=float))
    p1 = polygamma(1, np.asarray(y, dtype=float))
    precision = 1.0 / sigma2_k + np.sum(x**2 / p1)
    shift = mu_k / sigma2_k + np.sum(x * (p0 - others) / p1)
    return shift / precision, 1.0 / precision


def grid_moments(log_density, center, half_width, n_points=100_001):
    """Mean and sd of an unnormalised log density by brute-force grid sums."""
    grid = np.linspace(center - half_width, center + half_width, n_points)
    logp = log_density(grid)
    p = np.exp(logp - logp.max())
    p /= p.sum()
    mean = float(np.sum(grid * p))
    return mean, float(math.sqrt(np.sum((grid - mean) ** 2 * p)))


def exact_conditional_logpdf(x, y, others, mu_k, sigma2_k):
    """Log of ``prod_i Pois(y_i | exp(others_i + x_i w)) N(w | mu_k, sigma2_k)``."""
    x, y, others = (np.asarray(a, dtype=float) for a in (x, y, others))

    def logp(w):
        eta = others[None, :] + np.outer(w, x)
        return np.sum(y * eta - np.exp(eta), axis=1) - (w - mu_k) ** 2 / (2 * sigma2_k)

    return logp


def ess_bruteforce(samples):
    """Multi-chain effective sample size with explicit loops."""
    s = [list(map(float, row)) for row in samples]
    m, n = len(s), len(s[0])
    means = [sum(r) / n for r in s]
    grand = sum(means) / m
    s2 = [sum((v - means[j]) ** 2 for v in s[j]) / (n - 1) for j in range(m)]
    var_plus = (n - 1) / (m * n) * sum(s2) + sum((mj - grand) ** 2 for mj in means) / (m - 1)
    rho = {}
    for t in range(1, n - 1):
        v_t = sum((s[j][i] - s[j][i - t]) ** 2 for j in range(m) for i in range(t, n))
        v_t /= m * (n - t)
        rho[t] = 1 - v_t / (2 * var_plus)
    T = n - 2
    for t in range(1, n - 2, 2):
        if t + 2 <= n - 2 and rho[t + 1] + rho[t + 2] < 0:
            T = t
            break
    return min(m * n / (1 + 2 * sum(rho[t] for t in range(1, T + 1))), m * n)
