import numpy as np

from ..linalg import RngStream, draw_normal
from .base import VIProblem


def make_affine_vi(n=20, seed=0, skew=1.0):
    """Strongly monotone ``F(z) = (I + S) z + c`` with ``S`` skew-symmetric.

    The unique solution ``-(I + S)^{-1} c`` is stored on the problem.
    """
    rng = RngStream(seed)
    G = draw_normal(rng, 0.0, 1.0, n * n).reshape(n, n)
    A = np.eye(n) + skew * (G - G.T) / 2.0
    c = draw_normal(rng, 0.0, 1.0, n)
    return VIProblem(
        n,
        lambda z: A @ z + c,
        lipschitz=float(np.linalg.norm(A, 2)),
        solution=np.linalg.solve(A, -c),
        start=np.zeros(n),
        name="affine",
        info={"A": A, "c": c},
    )
