"""Sparse (l1-regularized) logistic regression as a composite VI.

With ``K_ij = -b_i a_ij`` the objective is
``J(x) = sum_i softplus((K x)_i) + gamma ||x||_1``.
"""

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from ..errors import ParseError
from ..linalg import RngStream, draw_normal, draw_uniform, spectral_norm_gram
from ..prox import L1Norm
from .base import MONOTONE, VIProblem

GAMMA_FACTOR = 0.005


def softplus(y):
    """``log(1 + exp(y))`` without overflow."""
    return np.maximum(y, 0.0) + np.log1p(np.exp(-np.abs(y)))


def logistic_value(x, K):
    return float(softplus(np.asarray(K @ x).reshape(-1)).sum())


def logistic_grad(x, K):
    """Return ``(f(x), grad f(x))`` for ``f(x) = sum softplus(K x)``."""
    y = np.asarray(K @ x).reshape(-1)
    grad = np.asarray(K.T @ expit(y)).reshape(-1)
    return float(softplus(y).sum()), grad


def default_gamma(A, b):
    return GAMMA_FACTOR * float(np.abs(np.asarray(A.T @ b)).max())


def synthetic_logistic_data(m, n, seed=0, flip=0.1):
    """Gaussian features, labels from a planted separator with a fraction flipped."""
    rng = RngStream(seed)
    A = draw_normal(rng, 0.0, 1.0, m * n).reshape(m, n)
    w = draw_normal(rng, 0.0, 1.0, n)
    b = np.where(A @ w >= 0, 1.0, -1.0)
    flipped = draw_uniform(rng, 0.0, 1.0, m) < flip
    b[flipped] *= -1.0
    return A, b


def make_logistic(A, b, gamma=None):
    """Build the VI for data ``(A, b)``; ``gamma`` defaults to ``0.005 ||A^T b||_inf``."""
    b = np.asarray(b, dtype=float)
    bad = ~np.isin(b, (-1.0, 1.0))
    if np.any(bad):
        raise ParseError(0, f"label {b[bad][0]} is not -1 or +1")
    if A.shape[0] != b.size:
        raise ValueError("A must have one row per label")
    if sp.issparse(A):
        K = sp.csr_matrix(sp.diags(-b) @ A)
    else:
        K = -b[:, None] * np.asarray(A, dtype=float)
    if gamma is None:
        gamma = default_gamma(A, b)
    n = A.shape[1]
    L = 0.25 * spectral_norm_gram(K)
    return VIProblem(
        n,
        lambda x: logistic_grad(x, K)[1],
        g=L1Norm(gamma),
        smooth_energy=lambda x: logistic_value(x, K),
        lipschitz=L,
        monotonicity=MONOTONE,
        start=np.zeros(n),
        name="logistic",
        info={"K": K, "gamma": gamma},
    )


def make_synthetic_logistic(m, n, seed=0, gamma=None):
    A, b = synthetic_logistic_data(m, n, seed)
    return make_logistic(A, b, gamma)
