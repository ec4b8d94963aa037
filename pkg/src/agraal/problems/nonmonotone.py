"""Nonmonotone equation ``M(z) z = 0`` with ``M(z) = t1 t1^T + t2 t2^T``.

``t1 = A sin(z)`` and ``t2 = B exp(z)`` (entrywise). ``M(z)`` is positive
semidefinite, so ``<F(z), z> >= 0`` everywhere: the Minty inequality holds
at ``z = 0`` although ``F`` is not monotone.
"""

import numpy as np

from ..linalg import RngStream, draw_normal
from .base import MINTY_ONLY, VIProblem

NONTRIVIAL_NORM = 0.1


def nonmonotone_F(z, A, B):
    z = np.asarray(z, dtype=float)
    t1 = A @ np.sin(z)
    t2 = B @ np.exp(z)
    return t1 * (t1 @ z) + t2 * (t2 @ z)


def make_nonmonotone(n=100, seed=0):
    rng = RngStream(seed)
    A = draw_normal(rng, 0.0, 1.0, n * n).reshape(n, n)
    B = draw_normal(rng, 0.0, 1.0, n * n).reshape(n, n)
    return VIProblem(
        n,
        lambda z: nonmonotone_F(z, A, B),
        monotonicity=MINTY_ONLY,
        start=np.ones(n),
        name="nonmonotone",
        info={"A": A, "B": B, "minty_point": np.zeros(n)},
    )
