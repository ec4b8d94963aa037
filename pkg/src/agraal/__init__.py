"""Adaptive golden-ratio averaging solvers for variational inequality problems."""

from .diagnostics import (
    RateFit,
    StepsizeCheck,
    check_demicontractive,
    check_stepsize_invariants,
    ergodic_point,
    fit_linear_rate,
    lyapunov_energy,
    natural_residual,
    psi_value,
)
from .linalg import RngStream, draw_normal, draw_uniform, spectral_norm_gram
from .problems import FixedPointProblem, VIProblem
from .solvers import (
    GOLDEN,
    METHODS,
    SolverState,
    StepsizeRule,
    StopRule,
    Trace,
    agraal_metric_step,
    agraal_step,
    agraal_stepsize,
    fbf_step,
    fista_step,
    fixedpoint_agraal_step,
    graal_step,
    km_step,
    lambda0_heuristic,
    pgm_step,
    run,
)

__version__ = "0.1.0"
