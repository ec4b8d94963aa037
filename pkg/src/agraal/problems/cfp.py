"""Convex feasibility by simultaneous projection, ``T = (1/m) sum_i P_{C_i}``."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..linalg import RngStream, as_sparse, draw_normal, draw_uniform
from ..prox import project_ball, project_hyperplane
from .base import FIRMLY_NONEXPANSIVE, FixedPointProblem


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def project(self, x):
        return project_ball(x, self.center, self.radius)


@dataclass(frozen=True)
class Hyperplane:
    normal: np.ndarray
    offset: float

    def project(self, x):
        return project_hyperplane(x, self.normal, self.offset)


def simultaneous_projection(x, sets):
    """Mean of the projections of ``x`` onto every set, summed in list order."""
    if not sets:
        raise ValueError("at least one set is required")
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for s in sets:
        total += s.project(x)
    return total / len(sets)


def balls_operator(centers, radii):
    """Vectorized simultaneous projection onto the balls B(centers[i], radii[i])."""
    centers = np.asarray(centers, dtype=float)
    radii = np.asarray(radii, dtype=float)
    m = centers.shape[0]

    def T(x):
        d = x - centers
        dist = np.sqrt(np.einsum("ij,ij->i", d, d))
        scale = np.ones(m)
        outside = dist > radii
        scale[outside] = radii[outside] / dist[outside]
        return (centers + scale[:, None] * d).mean(axis=0)

    return T


def hyperplanes_operator(A, b):
    """Vectorized simultaneous projection onto ``{x : <a_i, x> = b_i}``."""
    A = as_sparse(A)
    b = np.asarray(b, dtype=float)
    row_sq = np.asarray(A.multiply(A).sum(axis=1)).reshape(-1)
    if np.any(row_sq == 0):
        raise ValueError("every hyperplane normal must be nonzero")
    m = A.shape[0]
    At = A.T.tocsr()

    def T(x):
        return x - (At @ ((A @ x - b) / row_sq)) / m

    return T


def make_balls_cfp(n, m, seed=0):
    """``m`` balls in R^n with N(0, 100) centers and radii ``||c_i|| + 1``.

    The origin lies in every ball. The starting point is the mean of the
    centers.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    rng = RngStream(seed)
    centers = draw_normal(rng, 0.0, 10.0, m * n).reshape(m, n)
    radii = np.linalg.norm(centers, axis=1) + 1.0
    return FixedPointProblem(
        n,
        balls_operator(centers, radii),
        kind=FIRMLY_NONEXPANSIVE,
        start=centers.mean(axis=0),
        solution=None,
        name="balls-cfp",
        info={"centers": centers, "radii": radii, "feasible_point": np.zeros(n)},
    )


def random_sparse_rows(rng, m, n, density):
    """Random ``m x n`` CSR matrix with N(0,1) entries and no zero rows."""
    rows = []
    for _ in range(m):
        while True:
            mask = draw_uniform(rng, 0.0, 1.0, n) < density
            vals = draw_normal(rng, 0.0, 1.0, n)
            row = np.where(mask, vals, 0.0)
            if np.any(row):
                break
        rows.append(sp.csr_matrix(row))
    return as_sparse(sp.vstack(rows))


def make_linear_cfp(n, m, noise_std=1.0, seed=0, density=0.05):
    """Hyperplane feasibility for ``A x = A x_true + noise``.

    ``A`` is a random sparse ``m x n`` matrix. With ``noise_std > 0`` and
    ``m > n`` the system is generically inconsistent and the fixed points of
    ``T`` minimize ``sum_i dist(x, C_i)^2``. The start is the origin.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    if noise_std < 0:
        raise ValueError("noise_std must be nonnegative")
    rng = RngStream(seed)
    A = random_sparse_rows(rng, m, n, density)
    x_true = draw_normal(rng, 0.0, 1.0, n)
    b = A @ x_true + draw_normal(rng, 0.0, noise_std, m)
    return FixedPointProblem(
        n,
        hyperplanes_operator(A, b),
        kind=FIRMLY_NONEXPANSIVE,
        start=np.zeros(n),
        solution=x_true if noise_std == 0 else None,
        name="linear-cfp",
        info={"A": A, "b": b, "x_true": x_true},
    )
