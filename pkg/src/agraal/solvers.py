"""GRAAL solver family and baseline methods.

Every method is a pure transition ``step(state, problem, ...) -> state``
on an immutable :class:`SolverState`; :func:`run` drives a method until a
:class:`StopRule` fires and collects a :class:`Trace`.

State convention for the GRAAL family: before step ``k`` the state holds
``z = z^k``, ``z_prev = z^{k-1}``, ``F_prev = F(z^{k-1})``,
``z_bar = zbar^{k-1}``, ``lam = lambda_{k-1}`` and ``theta = theta_{k-1}``.
After the step the same fields hold the values shifted by one, and
``lam_prev``, ``theta_prev``, ``dz_sq``, ``dF_sq`` record what the step used.
"""

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .diagnostics import natural_residual
from .errors import CapabilityError, DomainError, LinesearchFailure, NumericalFailure
from .linalg import RngStream, draw_uniform
from .problems.base import FixedPointProblem, VIProblem
from .prox import DiagonalMetric, prox_metric

log = logging.getLogger(__name__)

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

VI_METHODS = ("graal", "agraal", "agraal-linear", "agraal-metric", "fbf", "pgm", "fista")
FIXED_POINT_METHODS = ("agraal-fixpoint", "km")
METHODS = VI_METHODS + FIXED_POINT_METHODS
ADAPTIVE_METHODS = ("agraal", "agraal-linear", "agraal-metric", "agraal-fixpoint")

LINEAR_RATE_DELTA = 0.99
PERTURBATION = 1e-6
WARM_START_RETRIES = 10
MAX_HALVINGS = 60


@dataclass(frozen=True)
class StepsizeRule:
    """Constants of the adaptive stepsize.

    ``phi`` in (1, golden ratio], ``lam_max`` caps the steps and ``delta`` in
    (0, 1] damps the Lipschitz estimate (``delta = 1`` is the plain rule).
    ``rho = 1/phi + 1/phi^2`` is derived, never set.
    """

    phi: float = 1.5
    lam_max: float = 1e7
    delta: float = 1.0

    def __post_init__(self):
        if not (1.0 < self.phi <= GOLDEN + 1e-12):
            raise ValueError(f"phi must satisfy 1 < phi <= golden ratio ({GOLDEN!r}), got {self.phi}")
        if not self.lam_max > 0:
            raise ValueError(f"lam_max must be positive, got {self.lam_max}")
        if not (0.0 < self.delta <= 1.0):
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")

    @property
    def rho(self):
        return 1.0 / self.phi + 1.0 / self.phi**2


@dataclass(frozen=True)
class StopRule:
    tol: float = 1e-6
    max_iters: Optional[int] = 10_000
    max_fevals: Optional[int] = None
    max_seconds: Optional[float] = None

    def __post_init__(self):
        if self.max_iters is None and self.max_fevals is None and self.max_seconds is None:
            raise ValueError("a stop rule needs max_iters, max_fevals or max_seconds")
        if self.max_iters is not None and self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")


@dataclass(frozen=True)
class SolverState:
    z: np.ndarray
    z_prev: Optional[np.ndarray] = None
    z_bar: Optional[np.ndarray] = None
    F_prev: Optional[np.ndarray] = None
    lam: float = 1.0
    theta: float = 1.0
    k: int = 1
    fevals: int = 0
    proxevals: int = 0
    lam_prev: float = math.nan
    theta_prev: float = math.nan
    dz_sq: float = math.nan
    dF_sq: float = math.nan
    # FISTA extrapolation point and momentum parameter
    y: Optional[np.ndarray] = None
    t: float = 1.0


def _finite(state, previous):
    if not (np.all(np.isfinite(state.z)) and math.isfinite(state.lam)):
        raise NumericalFailure(f"non-finite iterate at k={previous.k}", state=previous)
    return state


def _sqnorm(v, w=None):
    if w is None:
        return float(v @ v)
    return float((w * v) @ v)


# ---------------------------------------------------------------- GRAAL, fixed step


def graal_step(state: SolverState, problem: VIProblem, lam: float) -> SolverState:
    """One GRAAL iteration with fixed stepsize ``lam <= golden / (2 L)``."""
    if problem.lipschitz is None:
        raise CapabilityError("GRAAL with a fixed step needs the Lipschitz constant of F")
    if not 0 < lam <= GOLDEN / (2.0 * problem.lipschitz) * (1 + 1e-12):
        raise ValueError(f"lam must lie in (0, golden/(2L)] = (0, {GOLDEN / (2 * problem.lipschitz)}]")
    Fz = problem.F(state.z)
    z_bar = ((GOLDEN - 1.0) * state.z + state.z_bar) / GOLDEN
    z_new = problem.g.prox(z_bar - lam * Fz, lam)
    new = replace(
        state,
        z=z_new,
        z_prev=state.z,
        z_bar=z_bar,
        F_prev=Fz,
        lam=lam,
        theta=GOLDEN,
        lam_prev=state.lam,
        theta_prev=state.theta,
        k=state.k + 1,
        fevals=state.fevals + 1,
        proxevals=state.proxevals + 1,
    )
    return _finite(new, state)


def init_graal(z1):
    z1 = np.array(z1, dtype=float)
    return SolverState(z=z1, z_bar=z1.copy(), theta=GOLDEN)


# ---------------------------------------------------------------- adaptive GRAAL


def agraal_stepsize(lam_prev, theta_prev, dz_sq, dF_sq, rule: StepsizeRule):
    """Adaptive step ``lambda_k`` and ratio ``theta_k``.

    ``dz_sq / dF_sq`` is taken as ``+inf`` whenever ``dF_sq == 0``.
    """
    if not lam_prev > 0:
        raise NumericalFailure(f"corrupted state: previous stepsize {lam_prev} is not positive")
    ratio = dz_sq / dF_sq if dF_sq > 0 else math.inf
    local = rule.phi * rule.delta * theta_prev / (4.0 * lam_prev) * ratio
    lam = min(rule.rho * lam_prev, local, rule.lam_max)
    return lam, rule.phi * lam / lam_prev


def lambda0_heuristic(z0, z1, problem):
    """``||z1 - z0|| / ||F(z1) - F(z0)||`` (two counted evaluations of F)."""
    diff = np.linalg.norm(problem.F(z1) - problem.F(z0))
    if diff == 0:
        raise ValueError("F(z1) == F(z0); choose another z0")
    return float(np.linalg.norm(np.asarray(z1) - np.asarray(z0)) / diff)


def perturb(z1, rng: RngStream, rel=PERTURBATION):
    """``z1 * (1 + rel * u)`` with ``u ~ U(-1, 1)``; zero entries get absolute size ``rel``."""
    z1 = np.asarray(z1, dtype=float)
    u = draw_uniform(rng, -1.0, 1.0, z1.size)
    scale = np.where(z1 != 0, z1, 1.0)
    return z1 + rel * u * scale


def warm_start(problem, z1, rng: RngStream, lam0=None):
    """Pick ``z0`` near ``z1`` and the initial step ``lambda_0``.

    Returns ``(z0, F(z0), lambda_0, evaluations)``. Without ``lam0`` the
    step comes from :func:`lambda0_heuristic`, retrying with a fresh
    perturbation while ``F(z1) == F(z0)``.
    """
    z1 = np.asarray(z1, dtype=float)
    if lam0 is not None:
        if not lam0 > 0:
            raise ValueError("lam0 must be positive")
        z0 = perturb(z1, rng)
        return z0, problem.F(z0), float(lam0), 1
    evals = 0
    for _ in range(WARM_START_RETRIES):
        z0 = perturb(z1, rng)
        F0 = problem.F(z0)
        F1 = problem.F(z1)
        evals += 2
        diff = np.linalg.norm(F1 - F0)
        if diff > 0 and math.isfinite(diff):
            return z0, F0, float(np.linalg.norm(z1 - z0) / diff), evals
    raise ValueError(f"F(z1) == F(z0) for {WARM_START_RETRIES} perturbations; cannot estimate lambda_0")


def init_agraal(problem, z1, rng: RngStream, lam0=None):
    """Initial state: ``zbar^0 = z^1``, ``theta_0 = 1`` and a warm-started ``lambda_0``."""
    z1 = np.array(z1, dtype=float)
    z0, F0, lam, evals = warm_start(problem, z1, rng, lam0)
    return SolverState(z=z1, z_prev=z0, z_bar=z1.copy(), F_prev=F0, lam=lam, theta=1.0, fevals=evals)


def _agraal_core(state, problem, rule, w_z, w_F, inv_m, prox):
    Fz = problem.F(state.z)
    dz_sq = _sqnorm(state.z - state.z_prev, w_z)
    dF_sq = _sqnorm(Fz - state.F_prev, w_F)
    lam, theta = agraal_stepsize(state.lam, state.theta, dz_sq, dF_sq, rule)
    phi = rule.phi
    z_bar = ((phi - 1.0) * state.z + state.z_bar) / phi
    direction = Fz if inv_m is None else Fz * inv_m
    z_new = prox(z_bar - lam * direction, lam)
    new = replace(
        state,
        z=z_new,
        z_prev=state.z,
        z_bar=z_bar,
        F_prev=Fz,
        lam=lam,
        theta=theta,
        lam_prev=state.lam,
        theta_prev=state.theta,
        dz_sq=dz_sq,
        dF_sq=dF_sq,
        k=state.k + 1,
        fevals=state.fevals + 1,
        proxevals=state.proxevals + 1,
    )
    return _finite(new, state)


def agraal_step(state: SolverState, problem: VIProblem, rule: StepsizeRule) -> SolverState:
    """One adaptive GRAAL iteration: one evaluation of F, one prox."""
    return _agraal_core(state, problem, rule, None, None, None, problem.g.prox)


def agraal_metric_step(state, problem, M: DiagonalMetric, P: DiagonalMetric, rule: StepsizeRule):
    """Adaptive GRAAL in the metrics induced by diagonal ``M`` and ``P``.

    Steps use ``||dz||_{MP}`` and ``||dF||_{M^-1 P}``; the update is
    ``prox^{MP}_{lam g}(zbar - lam M^-1 F(z))``.
    """
    if not isinstance(M, DiagonalMetric) or not isinstance(P, DiagonalMetric):
        raise CapabilityError("only diagonal metrics are supported")
    m, p = M.weights, P.weights
    if m.size != state.z.size or p.size != state.z.size:
        raise ValueError("metric dimension does not match the iterate")
    w = m * p
    g = problem.g
    return _agraal_core(
        state,
        problem,
        rule,
        w,
        p / m,
        1.0 / m,
        lambda v, lam: prox_metric(g, v, lam, w),
    )


def init_fixedpoint(fp: FixedPointProblem, x1, rng: RngStream, lam0=None):
    return init_agraal(fp.as_vi(), x1, rng, lam0)


def fixedpoint_agraal_step(state: SolverState, fp: FixedPointProblem, rule: StepsizeRule) -> SolverState:
    """Adaptive GRAAL for ``x = T x`` written as an affine combination of
    ``x^k``, ``xbar^{k-1}`` and ``T x^k``; one evaluation of ``T``."""
    x = state.z
    Tx = fp.T(x)
    Fx = x - Tx
    dz_sq = _sqnorm(x - state.z_prev)
    dF_sq = _sqnorm(Fx - state.F_prev)
    lam, theta = agraal_stepsize(state.lam, state.theta, dz_sq, dF_sq, rule)
    phi = rule.phi
    x_new = ((phi - 1.0) / phi - lam) * x + state.z_bar / phi + lam * Tx
    new = replace(
        state,
        z=x_new,
        z_prev=x,
        z_bar=((phi - 1.0) * x + state.z_bar) / phi,
        F_prev=Fx,
        lam=lam,
        theta=theta,
        lam_prev=state.lam,
        theta_prev=state.theta,
        dz_sq=dz_sq,
        dF_sq=dF_sq,
        k=state.k + 1,
        fevals=state.fevals + 1,
    )
    return _finite(new, state)


# ---------------------------------------------------------------- baselines


def fbf_step(state: SolverState, problem: VIProblem, nu=0.9, shrink=0.5, grow=1.0) -> SolverState:
    """Tseng's forward-backward-forward step with backtracking.

    Trial steps start at ``grow * lam`` and shrink until
    ``lam ||F(y) - F(z)|| <= nu ||y - z||``. Trial points outside the
    domain of F count as rejected.
    """
    if not (0 < nu < 1 and 0 < shrink < 1 and grow >= 1):
        raise ValueError("need 0 < nu < 1, 0 < shrink < 1 and grow >= 1")
    z = state.z
    Fz = problem.F(z)
    fevals, proxevals = 1, 0
    lam = grow * state.lam
    for _ in range(MAX_HALVINGS + 1):
        y = problem.g.prox(z - lam * Fz, lam)
        proxevals += 1
        try:
            Fy = problem.F(y)
        except DomainError:
            fevals += 1
            lam *= shrink
            continue
        fevals += 1
        dF = Fy - Fz
        dz_norm = np.linalg.norm(y - z)
        if lam * np.linalg.norm(dF) <= nu * dz_norm:
            break
        lam *= shrink
    else:
        raise LinesearchFailure(f"no acceptable step after {MAX_HALVINGS} reductions at k={state.k}")
    z_new = problem.g.project_domain(y - lam * dF)
    new = replace(
        state,
        z=z_new,
        z_prev=z,
        F_prev=Fz,
        lam=lam,
        lam_prev=state.lam,
        dz_sq=float(dz_norm**2),
        dF_sq=_sqnorm(dF),
        k=state.k + 1,
        fevals=state.fevals + fevals,
        proxevals=state.proxevals + proxevals,
    )
    return _finite(new, state)


def _require_lipschitz(problem):
    if problem.lipschitz is None:
        raise CapabilityError(f"{problem.name or 'problem'} has no Lipschitz constant")


def pgm_step(state: SolverState, problem: VIProblem, lam: float) -> SolverState:
    """Proximal gradient: ``x+ = prox_{lam g}(x - lam grad f(x))``."""
    _require_lipschitz(problem)
    x = state.z
    x_new = problem.g.prox(x - lam * problem.F(x), lam)
    new = replace(
        state,
        z=x_new,
        z_prev=x,
        lam=lam,
        lam_prev=state.lam,
        k=state.k + 1,
        fevals=state.fevals + 1,
        proxevals=state.proxevals + 1,
    )
    return _finite(new, state)


def fista_step(state: SolverState, problem: VIProblem, lam: float) -> SolverState:
    """FISTA: prox-gradient step at the extrapolated point ``y``."""
    _require_lipschitz(problem)
    x = state.z
    y = x if state.y is None else state.y
    x_new = problem.g.prox(y - lam * problem.F(y), lam)
    t_new = (1.0 + math.sqrt(1.0 + 4.0 * state.t**2)) / 2.0
    y_new = x_new + ((state.t - 1.0) / t_new) * (x_new - x)
    new = replace(
        state,
        z=x_new,
        z_prev=x,
        y=y_new,
        t=t_new,
        lam=lam,
        lam_prev=state.lam,
        k=state.k + 1,
        fevals=state.fevals + 1,
        proxevals=state.proxevals + 1,
    )
    return _finite(new, state)


def km_step(state: SolverState, fp: FixedPointProblem) -> SolverState:
    """Plain fixed-point iteration ``x+ = T x``."""
    new = replace(state, z=fp.T(state.z), z_prev=state.z, k=state.k + 1, fevals=state.fevals + 1)
    return _finite(new, state)


# ---------------------------------------------------------------- driver


@dataclass(slots=True)
class TraceRecord:
    k: int
    lam: float
    theta: float
    residual: float
    energy: Optional[float]
    dist_opt: Optional[float]
    fevals: int
    proxevals: int
    elapsed_s: float
    lam_prev: float = math.nan
    theta_prev: float = math.nan
    dz_sq: float = math.nan
    dF_sq: float = math.nan
    z_norm: float = math.nan
    ergodic_energy: Optional[float] = None


CSV_COLUMNS = ("k", "lambda", "theta", "residual", "energy", "dist_opt", "fevals", "proxevals", "elapsed_s")


@dataclass
class Trace:
    method: str
    records: list = field(default_factory=list)
    reason: str = ""
    message: str = ""
    final_state: Optional[SolverState] = None
    lam_sum: float = 0.0
    weighted_sum: Optional[np.ndarray] = None
    energy_min: float = math.inf

    def __len__(self):
        return len(self.records)

    def column(self, name):
        """Record field as a float array; ``None`` becomes NaN and ``lambda`` aliases ``lam``."""
        name = "lam" if name == "lambda" else name
        return np.array(
            [math.nan if (v := getattr(r, name)) is None else v for r in self.records], dtype=float
        )

    def accumulate(self, lam, z):
        """Add ``lam * z`` to the ergodic accumulators."""
        self.lam_sum += lam
        if self.weighted_sum is None:
            self.weighted_sum = lam * np.asarray(z, dtype=float)
        else:
            self.weighted_sum = self.weighted_sum + lam * z

    @property
    def converged(self):
        return self.reason == "converged"

    @property
    def final_point(self):
        return None if self.final_state is None else self.final_state.z


def _step_for(method, problem, rule, lam, metric, fbf):
    if method == "graal":
        return lambda s: graal_step(s, problem, lam)
    if method in ("agraal", "agraal-linear"):
        return lambda s: agraal_step(s, problem, rule)
    if method == "agraal-metric":
        M, P = metric
        return lambda s: agraal_metric_step(s, problem, M, P, rule)
    if method == "agraal-fixpoint":
        return lambda s: fixedpoint_agraal_step(s, problem, rule)
    if method == "fbf":
        return lambda s: fbf_step(s, problem, **fbf)
    if method == "pgm":
        return lambda s: pgm_step(s, problem, lam)
    if method == "fista":
        return lambda s: fista_step(s, problem, lam)
    if method == "km":
        return lambda s: km_step(s, problem)
    raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")


def run(
    method: str,
    problem,
    start=None,
    rule: Optional[StepsizeRule] = None,
    stop: Optional[StopRule] = None,
    *,
    lam: Optional[float] = None,
    lam0: Optional[float] = None,
    metric=None,
    fbf: Optional[dict] = None,
    residual_lambda: float = 1.0,
    seed: int = 0,
    track_energy: bool = True,
    track_ergodic: bool = False,
    log_every: int = 0,
) -> Trace:
    """Iterate ``method`` on ``problem`` until ``stop`` fires.

    Parameters
    ----------
    method : str
        One of :data:`METHODS`. ``agraal-fixpoint`` and ``km`` take a
        :class:`FixedPointProblem`; the others a :class:`VIProblem`.
    start : array, optional
        ``z^1``; defaults to ``problem.start``.
    rule : StepsizeRule, optional
        Adaptive-step constants. ``agraal-linear`` uses ``delta = 0.99``
        unless ``rule.delta < 1`` is given.
    lam : float, optional
        Fixed step for ``graal`` (default ``golden / (2 L)``), ``pgm`` and
        ``fista`` (default ``1 / L``).
    lam0 : float, optional
        Initial step for the adaptive methods and FBF, replacing the
        warm-start estimate.
    metric : (DiagonalMetric, DiagonalMetric), optional
        ``(M, P)`` for ``agraal-metric``; identity by default.
    fbf : dict, optional
        ``nu``, ``shrink``, ``grow`` for FBF.
    residual_lambda : float
        ``lambda`` of the natural residual used for stopping.
    seed : int
        Seed of the warm-start perturbation.

    The stopping residual is the natural residual for VI methods and
    ``||x - T x||`` for fixed-point methods. Residuals, energies and
    distances are diagnostics and do not count as evaluations. A
    non-finite iterate ends the run with reason ``numerical-failure`` and
    the last finite state in ``final_state``.
    """
    rule = rule or StepsizeRule()
    stop = stop or StopRule()
    fixed_point = method in FIXED_POINT_METHODS
    if fixed_point and not isinstance(problem, FixedPointProblem):
        raise TypeError(f"{method} needs a FixedPointProblem")
    if not fixed_point and not isinstance(problem, VIProblem):
        raise TypeError(f"{method} needs a VIProblem")
    if method == "agraal-linear" and rule.delta == 1.0:
        rule = replace(rule, delta=LINEAR_RATE_DELTA)
    if start is None:
        start = problem.start
    if start is None:
        raise ValueError("no starting point given and the problem defines none")
    z1 = np.array(start, dtype=float)
    if z1.size != problem.n:
        raise ValueError(f"start has length {z1.size}, problem dimension is {problem.n}")

    if method == "graal":
        if problem.lipschitz is None:
            raise CapabilityError("GRAAL with a fixed step needs the Lipschitz constant of F")
        lam = lam if lam is not None else GOLDEN / (2.0 * problem.lipschitz)
    elif method in ("pgm", "fista"):
        _require_lipschitz(problem)
        lam = lam if lam is not None else 1.0 / problem.lipschitz
        cap = 2.0 / problem.lipschitz if method == "pgm" else 1.0 / problem.lipschitz
        if not 0 < lam <= cap or (method == "pgm" and lam == cap):
            bound = "(0, 2/L)" if method == "pgm" else "(0, 1/L]"
            raise ValueError(f"{method} needs lam in {bound} with L = {problem.lipschitz}")
    if method == "agraal-metric" and metric is None:
        metric = (DiagonalMetric.identity(problem.n), DiagonalMetric.identity(problem.n))
    fbf = {"nu": 0.9, "shrink": 0.5, "grow": 1.0, **(fbf or {})}

    trace = Trace(method)
    if stop.max_iters == 0:
        trace.reason = "max_iters"
        return trace

    t0 = time.perf_counter()
    rng = RngStream(seed)
    if method in ADAPTIVE_METHODS:
        state = init_fixedpoint(problem, z1, rng, lam0) if fixed_point else init_agraal(problem, z1, rng, lam0)
    elif method == "graal":
        state = init_graal(z1)
    elif method == "fbf":
        if lam0 is None:
            _, _, lam0, evals = warm_start(problem, z1, rng)
        else:
            evals = 0
        state = SolverState(z=z1, lam=lam0, fevals=evals)
    else:
        state = SolverState(z=z1, lam=lam if lam is not None else 1.0)
    step = _step_for(method, problem, rule, lam, metric, fbf)

    if fixed_point:
        def residual(z):
            return problem.residual(z)
    else:
        def residual(z):
            return natural_residual(z, residual_lambda, problem)

    solution = problem.solution
    energy_fn = problem.energy if (track_energy and not fixed_point and problem.smooth_energy) else None

    while True:
        try:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                new = step(state)
                res = residual(new.z)
                z_norm = math.sqrt(_sqnorm(new.z))
                dist = None if solution is None else math.sqrt(_sqnorm(new.z - solution))
        except NumericalFailure as exc:
            trace.reason = "numerical-failure"
            trace.message = str(exc)
            trace.final_state = exc.state if exc.state is not None else state
            return trace
        step_lam = new.lam if method not in ("km",) else 1.0
        trace.accumulate(step_lam, new.z_prev)
        energy = energy_fn(new.z) if energy_fn else None
        ergodic = None
        if track_ergodic and energy_fn:
            ergodic = energy_fn(trace.weighted_sum / trace.lam_sum)
        if energy is not None:
            trace.energy_min = min(trace.energy_min, energy)
        k = len(trace.records) + 1
        trace.records.append(
            TraceRecord(
                k=k,
                lam=new.lam,
                theta=new.theta if method in ADAPTIVE_METHODS or method == "graal" else math.nan,
                residual=res,
                energy=energy,
                dist_opt=dist,
                fevals=new.fevals,
                proxevals=new.proxevals,
                elapsed_s=time.perf_counter() - t0,
                lam_prev=new.lam_prev,
                theta_prev=new.theta_prev,
                dz_sq=new.dz_sq,
                dF_sq=new.dF_sq,
                z_norm=z_norm,
                ergodic_energy=ergodic,
            )
        )
        state = new
        if log_every and k % log_every == 0:
            log.info("%s k=%d residual=%.3e lambda=%.3e", method, k, res, new.lam)
        if res <= stop.tol:
            trace.reason = "converged"
        elif stop.max_iters is not None and k >= stop.max_iters:
            trace.reason = "max_iters"
        elif stop.max_fevals is not None and new.fevals >= stop.max_fevals:
            trace.reason = "max_feval"
        elif stop.max_seconds is not None and time.perf_counter() - t0 >= stop.max_seconds:
            trace.reason = "timeout"
        if trace.reason:
            trace.final_state = state
            return trace
