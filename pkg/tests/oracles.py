"""Independent reference computations used by the tests.

Nothing here calls into the package under test.
"""

import math

import numpy as np


def jacobi_eigenvalues(S, tol=1e-14, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations."""
    A = np.array(S, dtype=float)
    n = A.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(sum(A[i, j] ** 2 for i in range(n) for j in range(n) if i != j))
        if off <= tol * max(1.0, float(np.abs(np.diag(A)).max())):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
    return np.sort(np.diag(A))


def central_difference(f, x, h=1e-6):
    """Gradient of a scalar function by central differences."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def partial_difference(fs, x, h=1e-6):
    """Diagonal of the Jacobian of a vector function: ``d fs(x)_i / d x_i``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        step = h * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = step
        out[i] = (fs(x + e)[i] - fs(x - e)[i]) / (2.0 * step)
    return out


def soft_threshold_1d(z, t):
    """Minimizer of ``t |x| + (x - z)^2 / 2`` by checking the three candidate regions."""
    candidates = [0.0]
    if z - t > 0:
        candidates.append(z - t)
    if z + t < 0:
        candidates.append(z + t)
    return min(candidates, key=lambda x: t * abs(x) + 0.5 * (x - z) ** 2)


def cournot_loss(q, gamma, beta, c, Lcap):
    """Cost minus revenue of every firm, written out from the model."""
    q = np.asarray(q, dtype=float)
    Q = q.sum()
    price = 5000.0 ** (1.0 / gamma) / Q ** (1.0 / gamma)
    cost = c * q + beta / (beta + 1.0) * Lcap ** (1.0 / beta) * q ** (1.0 + 1.0 / beta)
    return cost - q * price
