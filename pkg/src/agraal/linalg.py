"""Vectors, sparse matrices, seeded randomness and spectral-norm estimation.

Vectors are 1-d float64 numpy arrays. Sparse matrices are
``scipy.sparse.csr_matrix`` (row-major, sorted column indices per row);
dense 2-d arrays are accepted wherever only products ``K @ v`` and
``K.T @ v`` are needed.

Randomness
----------
Every random draw in the library goes through :class:`RngStream`, which
wraps numpy's PCG64 bit generator. PCG64 output is specified bit-for-bit
and is identical across platforms, so traces produced from a seed are
reproducible. Normal variates use the Box-Muller transform on uniform
draws: a request for ``n`` normals always consumes exactly
``2 * ceil(n / 2)`` uniforms.
"""

import math
import warnings

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceWarning

__all__ = [
    "RngStream",
    "draw_uniform",
    "draw_normal",
    "as_vector",
    "as_sparse",
    "spectral_norm_gram",
]

# seed of the start vector for power iteration; fixed so L is reproducible
_POWER_SEED = 0x5EED


class RngStream:
    """Seeded random stream (PCG64).

    A stream is mutable and should stay confined to one experiment run.
    """

    algorithm = "PCG64"

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def uniform01(self, n: int) -> np.ndarray:
        """``n`` draws from [0, 1)."""
        return self._gen.random(int(n))

    def spawn(self, key: int) -> "RngStream":
        """Independent child stream derived deterministically from (seed, key)."""
        mixed = np.random.SeedSequence([self.seed, int(key)]).generate_state(2, np.uint32)
        return RngStream(int(mixed[0]) << 32 | int(mixed[1]))

    def __repr__(self):
        return f"RngStream(seed={self.seed})"


def draw_uniform(rng: RngStream, lo: float, hi: float, n: int) -> np.ndarray:
    """``n`` i.i.d. draws from U(lo, hi)."""
    if not lo < hi:
        raise ValueError(f"draw_uniform needs lo < hi, got lo={lo}, hi={hi}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    return lo + (hi - lo) * rng.uniform01(n)


def draw_normal(rng: RngStream, mean: float, std: float, n: int) -> np.ndarray:
    """``n`` i.i.d. draws from N(mean, std**2) via Box-Muller."""
    if std < 0:
        raise ValueError(f"draw_normal needs std >= 0, got {std}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    pairs = math.ceil(n / 2)
    u = rng.uniform01(2 * pairs)
    # 1 - u lies in (0, 1], keeping the log finite
    radius = np.sqrt(-2.0 * np.log1p(-u[:pairs]))
    angle = 2.0 * np.pi * u[pairs:]
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return mean + std * z[:n]


def as_vector(z) -> np.ndarray:
    v = np.asarray(z, dtype=float)
    if v.ndim != 1:
        v = v.reshape(-1)
    return v


def as_sparse(K) -> sp.csr_matrix:
    """Canonical CSR copy of ``K`` with sorted indices."""
    K = sp.csr_matrix(K, dtype=float)
    K.sort_indices()
    return K


def spectral_norm_gram(K, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest eigenvalue of ``K^T K`` by power iteration.

    The Gram matrix is never formed; each iteration applies
    ``v -> K.T @ (K @ v)``. The start vector is a fixed pseudo-random unit
    vector so the estimate is reproducible. Iteration stops once the
    relative change of the Rayleigh quotient drops to ``tol``. If
    ``max_iter`` is exhausted the best estimate is returned and a
    :class:`~agraal.errors.ConvergenceWarning` is issued.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = K.shape[1]
    if n == 0:
        return 0.0
    v = draw_normal(RngStream(_POWER_SEED), 0.0, 1.0, n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(max_iter):
        w = K.T @ (K @ v)
        w = np.asarray(w, dtype=float).reshape(-1)
        new = float(v @ w)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        v = w / norm_w
        if abs(new - estimate) <= tol * abs(new):
            return new
        estimate = new
    warnings.warn(
        f"power iteration did not reach tol={tol} in {max_iter} iterations",
        ConvergenceWarning,
        stacklevel=2,
    )
    return estimate
