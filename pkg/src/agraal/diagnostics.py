"""Residuals, ergodic averages, Lyapunov energies, rate fits and operator-class checks.

None of these functions touch evaluation counters.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError


def natural_residual(z, lam, problem):
    """``||z - prox_{lam g}(z - lam F(z))||``; zero exactly at solutions."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    z = np.asarray(z, dtype=float)
    r = z - problem.g.prox(z - lam * problem.operator(z), lam)
    return math.sqrt(float(r @ r))


def ergodic_point(trace):
    """Stepsize-weighted average ``sum lam_i z^i / sum lam_i`` of the iterates of a trace."""
    if trace.weighted_sum is None or trace.lam_sum <= 0:
        raise ValueError("ergodic point of an empty trace")
    return trace.weighted_sum / trace.lam_sum


def psi_value(problem, u, v):
    """``Psi(u, v) = <F(u), v - u> + g(v) - g(u)``."""
    if not problem.g.has_value:
        raise CapabilityError("Psi needs the values of g")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(problem.operator(u) @ (v - u)) + problem.g.value(v) - problem.g.value(u)


def lyapunov_energy(z_bar, z, z_prev, theta_prev, phi, z_star):
    """``phi/(phi-1) ||zbar - z*||^2 + theta_prev/2 ||z - z_prev||^2``."""
    if not phi > 1:
        raise ValueError("phi must exceed 1")
    a = np.asarray(z_bar) - z_star
    b = np.asarray(z) - z_prev
    return phi / (phi - 1.0) * float(a @ a) + theta_prev / 2.0 * float(b @ b)


def lyapunov_after_step(state, phi, z_star):
    """Energy ``E_{k+1}`` available after step ``k`` of adaptive GRAAL.

    Uses ``zbar^{k+1} = ((phi-1) z^{k+1} + zbar^k) / phi``, which needs no
    further evaluation of F.
    """
    z_bar_next = ((phi - 1.0) * state.z + state.z_bar) / phi
    return lyapunov_energy(z_bar_next, state.z, state.z_prev, state.theta, phi, z_star)


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    window: tuple
    trimmed: int = 0

    @property
    def factor(self):
        """Per-iteration contraction factor ``exp(slope)``."""
        return float(np.exp(self.slope))


def fit_linear_rate(residuals, window=None):
    """Least-squares line through ``(k, log residual_k)``, ``k`` starting at 1.

    ``window = (k0, k1)`` selects iterations ``k0..k1`` inclusive; the
    default is the tail half. Nonpositive residuals in the window are
    dropped and counted in ``trimmed``.
    """
    r = np.asarray(residuals, dtype=float)
    n = r.size
    if window is None:
        window = (max(1, n // 2 + 1), n)
    k0, k1 = window
    if not 1 <= k0 < k1 <= n:
        raise ValueError(f"invalid window {window} for {n} residuals")
    ks = np.arange(k0, k1 + 1)
    vals = r[k0 - 1 : k1]
    keep = vals > 0
    ks, logs = ks[keep], np.log(vals[keep])
    if ks.size < 2:
        raise ValueError("fewer than two positive residuals in the window")
    slope, intercept = np.polyfit(ks, logs, 1)
    fitted = slope * ks + intercept
    ss_res = float(((logs - fitted) ** 2).sum())
    ss_tot = float(((logs - logs.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return RateFit(float(slope), float(intercept), r2, (int(k0), int(k1)), int((~keep).sum()))


def check_demicontractive(T, fixed_point, samples):
    """Largest ``||Tx - xbar||^2 - ||x - xbar||^2 - ||x - Tx||^2`` over samples.

    Nonpositive iff ``T`` is demi-contractive on the samples with respect
    to the fixed point ``xbar``.
    """
    xbar = np.asarray(fixed_point, dtype=float)
    if np.linalg.norm(T(xbar) - xbar) > 1e-9 * max(1.0, np.linalg.norm(xbar)):
        raise ValueError("fixed_point is not a fixed point of T")
    worst = -np.inf
    for x in samples:
        x = np.asarray(x, dtype=float)
        Tx = T(x)
        a, b, c = Tx - xbar, x - xbar, x - Tx
        worst = max(worst, float(a @ a - b @ b - c @ c))
    return worst


def monotonicity_gap(operator, pairs):
    """Smallest ``<F(u) - F(v), u - v>`` over ``(u, v)`` pairs."""
    return min(float((operator(u) - operator(v)) @ (u - v)) for u, v in pairs)


@dataclass(frozen=True)
class StepsizeCheck:
    """Worst values over a trace of the adaptive-step invariants.

    ``theta_max`` is compared with ``1 + 1/phi``; ``cap_ratio`` is
    ``max lam_k / min(rho lam_{k-1}, lam_max)``; ``estimate_ratio`` is
    ``max lam_k^2 dF^2 / (delta theta_k theta_{k-1} dz^2 / 4)``. Both
    ratios are at most 1 up to rounding when the rule was followed.
    """

    theta_max: float
    theta_bound: float
    cap_ratio: float
    estimate_ratio: float
    steps: int

    def ok(self, slack=1e-12):
        return (
            self.theta_max <= self.theta_bound + slack
            and self.cap_ratio <= 1.0 + slack
            and self.estimate_ratio <= 1.0 + slack
        )


def check_stepsize_invariants(trace, rule):
    """Evaluate :class:`StepsizeCheck` on the records of an adaptive GRAAL trace."""
    theta_max = cap = est = -math.inf
    for r in trace.records:
        theta_max = max(theta_max, r.theta)
        cap = max(cap, r.lam / min(rule.rho * r.lam_prev, rule.lam_max))
        rhs = rule.delta * r.theta * r.theta_prev / 4.0 * r.dz_sq
        lhs = r.lam**2 * r.dF_sq
        if rhs > 0:
            est = max(est, lhs / rhs)
        elif lhs > 0:
            est = math.inf
    return StepsizeCheck(theta_max, 1.0 + 1.0 / rule.phi, cap, est, len(trace.records))
