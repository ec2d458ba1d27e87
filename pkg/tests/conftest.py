"""Shared test helpers: independent dense oracles and small dataset factories.

The oracles below work on raw (time, status, X) arrays in the original
input order and build risk sets by direct time comparison, so they share
no code path with the package's sorted prefix-sum machinery.
"""

import numpy as np
import pytest

from sparsecox import SurvivalDataset


def dense_loglik(time, status, X, beta):
    """Breslow log-partial likelihood by brute-force risk-set enumeration."""
    time = np.asarray(time, dtype=float)
    X = np.asarray(X, dtype=float)
    eta = X @ np.asarray(beta, dtype=float)
    ll = 0.0
    for i in range(len(time)):
        if status[i]:
            risk = time >= time[i]
            ll += eta[i] - np.log(np.sum(np.exp(eta[risk])))
    return ll


def dense_coord_derivs(time, status, X, beta, j):
    """(g1, g2) for coordinate j by the two-pass dense reference."""
    time = np.asarray(time, dtype=float)
    X = np.asarray(X, dtype=float)
    eta = X @ np.asarray(beta, dtype=float)
    w = np.exp(eta)
    g1 = 0.0
    g2 = 0.0
    for i in range(len(time)):
        if status[i]:
            risk = time >= time[i]
            d = np.sum(w[risk])
            a = np.sum(X[risk, j] * w[risk]) / d
            b = np.sum(X[risk, j] ** 2 * w[risk]) / d
            g1 += X[i, j] - a
            g2 -= b - a * a
    return g1, g2


def dense_full_newton_mple(time, status, X, tol=1e-10, max_iter=100):
    """Unpenalized maximum partial-likelihood estimate by full Newton steps
    with the dense Hessian (independent of the coordinate-descent path)."""
    time = np.asarray(time, dtype=float)
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    beta = np.zeros(p)
    for _ in range(max_iter):
        eta = X @ beta
        w = np.exp(eta)
        grad = np.zeros(p)
        hess = np.zeros((p, p))
        for i in range(n):
            if status[i]:
                risk = time >= time[i]
                wr = w[risk]
                d = wr.sum()
                xr = X[risk]
                mean = xr.T @ wr / d
                grad += X[i] - mean
                hess -= (xr * wr[:, None]).T @ xr / d - np.outer(mean, mean)
        step = np.linalg.solve(hess, -grad)
        beta = beta + step
        if np.max(np.abs(step)) < tol:
            break
    return beta


def random_survival_data(rng, n, p, tie_fraction=0.3, censor_fraction=0.3,
                         beta_scale=0.5):
    """Small random survival arrays with deliberate ties."""
    X = rng.standard_normal((n, p))
    beta = rng.uniform(-beta_scale, beta_scale, size=p)
    t = rng.exponential(size=n) / np.exp(X @ beta)
    if tie_fraction > 0:
        # snap a fraction of the times onto a coarse grid to force ties
        snap = rng.random(n) < tie_fraction
        t[snap] = np.ceil(t[snap] * 4) / 4 + 0.25
    status = (rng.random(n) > censor_fraction).astype(int)
    if status.sum() == 0:
        status[int(np.argmin(t))] = 1
    return t, status, X


def make_dataset(rng, n, p, **kwargs):
    t, status, X = random_survival_data(rng, n, p, **kwargs)
    return SurvivalDataset.from_dense(t, status, X), (t, status, X)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
