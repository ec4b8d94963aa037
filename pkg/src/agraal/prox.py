"""Closed-form proximal operators and projections.

A :class:`ProxOp` represents a proper convex lsc function ``g`` through
``prox(z, tau) = argmin_x g(x) + ||x - z||^2 / (2 tau)``. Indicator
functions report ``value(x) = 0`` when ``x`` is feasible up to
``1e-9 * max(1, ||x||)`` and ``+inf`` otherwise.

Diagonal-metric proxes,
``argmin_x g(x) + ||x - z||_w^2 / (2 tau)`` with ``||v||_w^2 = sum w_i v_i^2``,
are available for separable ``g`` (zero, l1, orthant, box), for a single
hyperplane and for block sums of those.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError

__all__ = [
    "DiagonalMetric",
    "ProxOp",
    "ZeroFunction",
    "L1Norm",
    "NonnegIndicator",
    "BoxIndicator",
    "BallIndicator",
    "HyperplaneIndicator",
    "BlockSum",
    "CustomProx",
    "prox_l1",
    "project_nonneg",
    "project_box",
    "project_ball",
    "project_hyperplane",
    "prox_metric",
    "check_prox_inequality",
]

FEAS_TOL = 1e-9


def prox_l1(z, tau, gamma):
    """Soft-thresholding: prox of ``tau * gamma * ||.||_1``."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - tau * gamma, 0.0)


def project_nonneg(z):
    return np.maximum(np.asarray(z, dtype=float), 0.0)


def project_box(z, lo, hi):
    return np.clip(np.asarray(z, dtype=float), lo, hi)


def project_ball(z, c, r):
    """Projection onto the closed ball B(c, r)."""
    if r <= 0:
        raise ValueError("radius must be positive")
    z = np.asarray(z, dtype=float)
    d = z - c
    dist = np.linalg.norm(d)
    if dist <= r:
        return z.copy()
    return c + (r / dist) * d


def project_hyperplane(z, a, b):
    """Projection onto ``{x : <a, x> = b}``."""
    a = np.asarray(a, dtype=float)
    aa = float(a @ a)
    if aa == 0.0:
        raise ValueError("hyperplane normal must be nonzero")
    z = np.asarray(z, dtype=float)
    return z - ((float(a @ z) - b) / aa) * a


@dataclass(frozen=True)
class DiagonalMetric:
    """Positive diagonal weights ``w`` inducing ``||v||_w^2 = sum w_i v_i^2``."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("metric weights must be finite and strictly positive")
        object.__setattr__(self, "weights", w)

    @classmethod
    def identity(cls, n):
        return cls(np.ones(n))

    def sqnorm(self, v):
        return float((self.weights * v) @ v)

    def __mul__(self, other):
        return DiagonalMetric(self.weights * other.weights)

    def __len__(self):
        return len(self.weights)


class ProxOp:
    """Base class; subclasses implement :meth:`prox` and usually :meth:`value`."""

    domain = "all-space"
    has_value = True
    # prox is the identity (g = 0)
    is_zero = False

    def prox(self, z, tau=1.0):
        raise NotImplementedError

    def value(self, z):
        raise CapabilityError(f"{type(self).__name__} has no value evaluator")

    def prox_weighted(self, z, tau, w):
        raise CapabilityError(f"no diagonal-metric prox for {type(self).__name__}")

    def project_domain(self, z):
        """Projection onto ``dom g`` (identity when ``dom g`` is the whole space)."""
        return np.asarray(z, dtype=float)

    def _indicator(self, feasible):
        return 0.0 if feasible else np.inf


class ZeroFunction(ProxOp):
    is_zero = True

    def prox(self, z, tau=1.0):
        return np.array(z, dtype=float)

    def value(self, z):
        return 0.0

    def prox_weighted(self, z, tau, w):
        return np.array(z, dtype=float)

    def __repr__(self):
        return "ZeroFunction()"


class L1Norm(ProxOp):
    """``gamma * ||x||_1``."""

    def __init__(self, gamma):
        if gamma < 0:
            raise ValueError("gamma must be nonnegative")
        self.gamma = float(gamma)

    def prox(self, z, tau=1.0):
        return prox_l1(z, tau, self.gamma)

    def value(self, z):
        return self.gamma * float(np.abs(z).sum())

    def prox_weighted(self, z, tau, w):
        z = np.asarray(z, dtype=float)
        return np.sign(z) * np.maximum(np.abs(z) - tau * self.gamma / w, 0.0)

    def __repr__(self):
        return f"L1Norm(gamma={self.gamma!r})"


class NonnegIndicator(ProxOp):
    domain = "nonneg-orthant"

    def prox(self, z, tau=1.0):
        return project_nonneg(z)

    def value(self, z):
        z = np.asarray(z, dtype=float)
        scale = max(1.0, float(np.linalg.norm(z)))
        return self._indicator(z.size == 0 or z.min() >= -FEAS_TOL * scale)

    def prox_weighted(self, z, tau, w):
        return project_nonneg(z)

    def project_domain(self, z):
        return project_nonneg(z)

    def __repr__(self):
        return "NonnegIndicator()"


class BoxIndicator(ProxOp):
    domain = "box"

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if np.any(self.lo > self.hi):
            raise ValueError("box needs lo <= hi")

    def prox(self, z, tau=1.0):
        return project_box(z, self.lo, self.hi)

    def value(self, z):
        z = np.asarray(z, dtype=float)
        slack = FEAS_TOL * max(1.0, float(np.linalg.norm(z)))
        return self._indicator(bool(np.all(z >= self.lo - slack) and np.all(z <= self.hi + slack)))

    def prox_weighted(self, z, tau, w):
        return self.prox(z)

    def project_domain(self, z):
        return self.prox(z)


class BallIndicator(ProxOp):
    domain = "ball"

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)

    def prox(self, z, tau=1.0):
        return project_ball(z, self.center, self.radius)

    def value(self, z):
        z = np.asarray(z, dtype=float)
        slack = FEAS_TOL * max(1.0, float(np.linalg.norm(z)))
        return self._indicator(np.linalg.norm(z - self.center) <= self.radius + slack)

    def project_domain(self, z):
        return self.prox(z)


class HyperplaneIndicator(ProxOp):
    domain = "affine"

    def __init__(self, a, b):
        self.a = np.asarray(a, dtype=float)
        if not np.any(self.a):
            raise ValueError("hyperplane normal must be nonzero")
        self.b = float(b)

    def prox(self, z, tau=1.0):
        return project_hyperplane(z, self.a, self.b)

    def value(self, z):
        z = np.asarray(z, dtype=float)
        gap = abs(float(self.a @ z) - self.b) / np.linalg.norm(self.a)
        return self._indicator(gap <= FEAS_TOL * max(1.0, float(np.linalg.norm(z))))

    def prox_weighted(self, z, tau, w):
        # argmin ||x - z||_w^2 s.t. <a, x> = b
        z = np.asarray(z, dtype=float)
        a_scaled = self.a / w
        return z - ((float(self.a @ z) - self.b) / float(self.a @ a_scaled)) * a_scaled

    def project_domain(self, z):
        return self.prox(z)


class BlockSum(ProxOp):
    """``g(z) = sum_j g_j(z[block_j])`` over consecutive blocks of the given sizes."""

    domain = "product"

    def __init__(self, parts, sizes):
        if len(parts) != len(sizes):
            raise ValueError("one size per block is required")
        self.parts = list(parts)
        self.sizes = [int(s) for s in sizes]
        self._cuts = np.cumsum([0] + self.sizes)
        self.has_value = all(p.has_value for p in self.parts)
        self.is_zero = all(p.is_zero for p in self.parts)
        self.domain = "all-space" if all(p.domain == "all-space" for p in self.parts) else "product"

    def _split(self, z):
        z = np.asarray(z, dtype=float)
        if z.size != self._cuts[-1]:
            raise ValueError(f"expected vector of length {self._cuts[-1]}, got {z.size}")
        return [z[a:b] for a, b in zip(self._cuts[:-1], self._cuts[1:])]

    def prox(self, z, tau=1.0):
        if self.is_zero:
            return np.array(z, dtype=float)
        return np.concatenate([p.prox(zi, tau) for p, zi in zip(self.parts, self._split(z))])

    def value(self, z):
        return float(sum(p.value(zi) for p, zi in zip(self.parts, self._split(z))))

    def prox_weighted(self, z, tau, w):
        ws = self._split(w)
        return np.concatenate(
            [p.prox_weighted(zi, tau, wi) for p, zi, wi in zip(self.parts, self._split(z), ws)]
        )

    def project_domain(self, z):
        if self.domain == "all-space":
            return np.array(z, dtype=float)
        return np.concatenate([p.project_domain(zi) for p, zi in zip(self.parts, self._split(z))])


class CustomProx(ProxOp):
    """Wrap user callables ``prox_fn(z, tau)`` and optionally ``value_fn(z)``."""

    def __init__(self, prox_fn, value_fn=None, domain="all-space", project_fn=None):
        self._prox = prox_fn
        self._value = value_fn
        self._project = project_fn
        self.domain = domain
        self.has_value = value_fn is not None

    def prox(self, z, tau=1.0):
        return np.asarray(self._prox(z, tau), dtype=float)

    def value(self, z):
        if self._value is None:
            return super().value(z)
        return float(self._value(z))

    def project_domain(self, z):
        if self._project is None:
            return np.asarray(z, dtype=float)
        return self._project(z)


def prox_metric(g: ProxOp, z, tau, w):
    """Prox of ``tau * g`` in the diagonal metric ``w`` (a :class:`DiagonalMetric` or weights).

    With unit weights this returns exactly ``g.prox(z, tau)`` for every
    shipped separable ``g``.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if not isinstance(w, DiagonalMetric):
        w = DiagonalMetric(w)
    z = np.asarray(z, dtype=float)
    if len(w) != z.size:
        raise ValueError("metric and vector dimensions differ")
    return g.prox_weighted(z, tau, w.weights)


def check_prox_inequality(g: ProxOp, z, probes, tau=1.0):
    """Largest violation of the prox inequality at ``xbar = prox_{tau g}(z)``.

    Returns ``max_x tau*(g(xbar) - g(x)) - <xbar - z, x - xbar>`` over the
    probes; a correct prox gives a value <= 0 up to rounding.
    """
    if not g.has_value:
        raise CapabilityError("prox-inequality check needs a value evaluator")
    z = np.asarray(z, dtype=float)
    xbar = g.prox(z, tau)
    g_bar = g.value(xbar)
    worst = -np.inf
    for x in probes:
        x = np.asarray(x, dtype=float)
        gx = g.value(x)
        if np.isinf(gx):
            continue
        worst = max(worst, tau * (g_bar - gx) - float((xbar - z) @ (x - xbar)))
    return worst
