"""Bilinear saddle point ``min_x max_y g1(x) + <K x, y> - g2(y)``."""

import math

import numpy as np

from ..linalg import RngStream, draw_normal, spectral_norm_gram
from ..prox import BlockSum, ZeroFunction
from .base import MONOTONE, VIProblem


def make_bilinear_saddle(K, g1=None, g2=None, solution=None, start=None, name="bilinear-saddle"):
    """VI with ``z = (x, y)``, ``F(z) = (K^T y, -K x)`` and ``g = g1(x) + g2(y)``.

    ``K`` is ``p x q``; ``x`` has length ``q`` and ``y`` length ``p``.
    """
    if K.ndim != 2:
        raise ValueError("K must be a matrix")
    p, q = K.shape
    g1 = g1 or ZeroFunction()
    g2 = g2 or ZeroFunction()
    n = p + q

    def operator(z):
        z = np.asarray(z, dtype=float)
        if z.size != n:
            raise ValueError(f"expected a vector of length {n}, got {z.size}")
        x, y = z[:q], z[q:]
        return np.concatenate([np.asarray(K.T @ y).reshape(-1), -np.asarray(K @ x).reshape(-1)])

    return VIProblem(
        n,
        operator,
        g=BlockSum([g1, g2], [q, p]),
        lipschitz=math.sqrt(spectral_norm_gram(K, tol=1e-13, max_iter=100_000)),
        solution=solution,
        monotonicity=MONOTONE,
        start=start,
        name=name,
        info={"K": K},
    )


def make_random_saddle(n=20, seed=0):
    """Square Gaussian ``K`` with ``g1 = g2 = 0``; the solution is the origin."""
    rng = RngStream(seed)
    K = draw_normal(rng, 0.0, 1.0, n * n).reshape(n, n)
    start = draw_normal(rng, 0.0, 1.0, 2 * n)
    return make_bilinear_saddle(K, solution=np.zeros(2 * n), start=start)
