import threading
from typing import Callable, Optional

import numpy as np

from ..prox import ProxOp, ZeroFunction

MONOTONE = "monotone"
C4_PSEUDO = "C4-pseudo"
MINTY_ONLY = "minty-only"

FIRMLY_NONEXPANSIVE = "firmly-nonexpansive"
NONEXPANSIVE = "nonexpansive"
DEMI_CONTRACTIVE = "demi-contractive"


class _Counter:
    """Thread-safe evaluation counter."""

    def __init__(self):
        self._lock = threading.Lock()
        self._value = 0

    def increment(self):
        with self._lock:
            self._value += 1

    @property
    def value(self):
        with self._lock:
            return self._value

    def reset(self):
        with self._lock:
            self._value = 0


class VIProblem:
    """Find ``z*`` with ``<F(z*), z - z*> + g(z) - g(z*) >= 0`` for all ``z``.

    Parameters
    ----------
    n : int
        Dimension.
    operator : callable
        ``F``. Call :meth:`F` to evaluate it with counting; ``operator`` itself
        is the raw, uncounted evaluator used by diagnostics.
    g : ProxOp
        Nonsmooth part; defaults to the zero function.
    smooth_energy : callable, optional
        ``f`` with ``F = grad f`` for composite minimization. Enables
        :meth:`energy` (``J = f + g``).
    lipschitz : float, optional
        Global Lipschitz constant of ``F``.
    solution : array, optional
        A known solution.
    monotonicity : str
        ``"monotone"``, ``"C4-pseudo"`` or ``"minty-only"``.
    start : array, optional
        Default starting point of the experiments.
    """

    def __init__(
        self,
        n: int,
        operator: Callable,
        g: Optional[ProxOp] = None,
        smooth_energy: Optional[Callable] = None,
        lipschitz: Optional[float] = None,
        solution=None,
        monotonicity: str = MONOTONE,
        start=None,
        name: str = "",
        info: Optional[dict] = None,
    ):
        self.n = int(n)
        self.operator = operator
        self.g = g if g is not None else ZeroFunction()
        self.smooth_energy = smooth_energy
        self.lipschitz = lipschitz
        self.solution = None if solution is None else np.asarray(solution, dtype=float)
        self.monotonicity = monotonicity
        self.start = None if start is None else np.asarray(start, dtype=float)
        self.name = name
        self.info = info or {}
        self._fevals = _Counter()

    def F(self, z):
        self._fevals.increment()
        return self.operator(z)

    @property
    def fevals(self):
        return self._fevals.value

    def reset_counter(self):
        self._fevals.reset()

    def energy(self, z):
        if self.smooth_energy is None:
            return None
        return float(self.smooth_energy(z)) + self.g.value(z)

    def __repr__(self):
        return f"VIProblem(name={self.name!r}, n={self.n})"


class FixedPointProblem:
    """Find ``x = T x``. ``T`` must be defined on the whole space."""

    def __init__(self, n, operator, kind=NONEXPANSIVE, start=None, solution=None, name="", info=None):
        self.n = int(n)
        self.operator = operator
        self.kind = kind
        self.start = None if start is None else np.asarray(start, dtype=float)
        self.solution = None if solution is None else np.asarray(solution, dtype=float)
        self.name = name
        self.info = info or {}
        self._tevals = _Counter()

    def T(self, x):
        self._tevals.increment()
        return self.operator(x)

    @property
    def tevals(self):
        return self._tevals.value

    # solvers count operator calls uniformly as fevals
    fevals = tevals

    def reset_counter(self):
        self._tevals.reset()

    def residual(self, x):
        """``||x - T x||`` (uncounted)."""
        return float(np.linalg.norm(x - self.operator(x)))

    def as_vi(self):
        """The equivalent VI with ``F = id - T`` and ``g = 0``.

        Evaluations of the returned problem's ``F`` count towards this
        problem's counter.
        """
        T = self.operator

        def operator(x):
            return x - T(x)

        vi = VIProblem(
            self.n,
            operator,
            solution=self.solution,
            monotonicity=MONOTONE if self.kind in (FIRMLY_NONEXPANSIVE, NONEXPANSIVE) else C4_PSEUDO,
            start=self.start,
            name=f"{self.name}:id-T",
        )
        vi._fevals = self._tevals
        return vi

    def __repr__(self):
        return f"FixedPointProblem(name={self.name!r}, n={self.n})"
