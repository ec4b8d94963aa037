"""Nash-Cournot oligopoly equilibrium as a VI over the nonnegative orthant.

Firm ``i`` has cost
``f_i(q) = c_i q + beta_i/(beta_i+1) * L_i^(1/beta_i) * q^((beta_i+1)/beta_i)``
and the market inverse demand is ``p(Q) = 5000^(1/gamma) * Q^(-1/gamma)``.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..linalg import RngStream, draw_uniform
from ..prox import NonnegIndicator
from .base import MONOTONE, VIProblem

MIN_SUPPLY = 1e-12

SCENARIOS = {
    # gamma, beta range; c ~ U(1, 100) and L ~ U(0.5, 5) in both
    "a": (1.1, (0.5, 2.0)),
    "b": (1.5, (0.3, 4.0)),
}


@dataclass(frozen=True)
class NashParams:
    gamma: float
    beta: np.ndarray
    c: np.ndarray
    Lcap: np.ndarray
    scenario: str = ""
    seed: int = 0

    def __post_init__(self):
        if not self.gamma > 1:
            raise ValueError("gamma must exceed 1")
        for name in ("beta", "c", "Lcap"):
            v = np.asarray(getattr(self, name), dtype=float)
            if np.any(v <= 0):
                raise ValueError(f"{name} must be positive")
            object.__setattr__(self, name, v)

    @property
    def n(self):
        return self.beta.size


def inverse_demand(Q, gamma):
    return 5000.0 ** (1.0 / gamma) * Q ** (-1.0 / gamma)


def nash_F(q, p: NashParams):
    """Marginal cost minus marginal revenue of every firm."""
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise DomainError("Nash operator is defined on the nonnegative orthant only")
    Q = q.sum()
    if not Q > MIN_SUPPLY:
        raise DomainError(f"total supply Q={Q} is too small; inverse demand is undefined")
    inv_beta = 1.0 / p.beta
    marginal_cost = p.c + p.Lcap**inv_beta * q**inv_beta
    price = inverse_demand(Q, p.gamma)
    dprice = -price / (p.gamma * Q)
    return marginal_cost - price - q * dprice


def firm_profit_loss(q, p: NashParams):
    """``f_i(q_i) - q_i p(Q)`` for every firm (cost minus revenue)."""
    q = np.asarray(q, dtype=float)
    b = p.beta
    cost = p.c * q + b / (b + 1.0) * p.Lcap ** (1.0 / b) * q ** ((b + 1.0) / b)
    return cost - q * inverse_demand(q.sum(), p.gamma)


def nash_params(scenario, n, seed):
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown Nash scenario {scenario!r}; expected 'a' or 'b'")
    if n < 1:
        raise ValueError("n must be at least 1")
    gamma, (blo, bhi) = SCENARIOS[scenario]
    rng = RngStream(seed)
    beta = draw_uniform(rng, blo, bhi, n)
    c = draw_uniform(rng, 1.0, 100.0, n)
    Lcap = draw_uniform(rng, 0.5, 5.0, n)
    return NashParams(gamma, beta, c, Lcap, scenario=scenario, seed=seed)


def make_nash(scenario="a", n=1000, seed=0):
    p = nash_params(scenario, n, seed)
    return VIProblem(
        n,
        lambda q: nash_F(q, p),
        g=NonnegIndicator(),
        monotonicity=MONOTONE,
        start=np.ones(n),
        name=f"nash-{scenario}",
        info={"params": p},
    )
