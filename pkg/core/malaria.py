"""
Fractional-order malaria model with three time-dependent controls:
treated bednets (u1), treatment of infected humans (u2) and insecticide
spray (u3).

Every rate parameter enters the dynamics raised to the fractional order
alpha; the transmission probabilities b and c do not. Costates come in two
variants: the optimality system exactly as printed ("paper_eq17") and the
adjoint assembled from dW/dX + lam^T dM/dX of the state equations
("mechanical_adjoint").
"""

from dataclasses import asdict, dataclass, fields
from functools import cached_property
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np

from core.errors import DomainError
from core.sweep import FocpProblem
from tools.fractional import TimeGrid, validate_order

STATE_NAMES = ("S_H", "I_H", "R_H", "S_V", "I_V")
CONTROL_NAMES = ("u1", "u2", "u3")
COSTATE_NAMES = ("lambda1", "lambda2", "lambda3", "lambda4", "lambda5")
COSTATE_VARIANTS = ("paper_eq17", "mechanical_adjoint")

DEFAULT_HORIZON = 100.0
DEFAULT_N_STEPS = 1000


class StateVec(NamedTuple):
    S_H: float
    I_H: float
    R_H: float
    S_V: float
    I_V: float


class CostateVec(NamedTuple):
    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    lambda5: float


class ControlVec(NamedTuple):
    u1: float
    u2: float
    u3: float


class StrategyMask(NamedTuple):
    use_u1: bool
    use_u2: bool
    use_u3: bool


BASELINE = "no_controls"

STRATEGIES: Dict[str, StrategyMask] = {
    "bednets": StrategyMask(True, False, False),
    "treatment": StrategyMask(False, True, False),
    "spray": StrategyMask(False, False, True),
    "bednets_treatment": StrategyMask(True, True, False),
    "bednets_spray": StrategyMask(True, False, True),
    "treatment_spray": StrategyMask(False, True, True),
    "all_controls": StrategyMask(True, True, True),
    BASELINE: StrategyMask(False, False, False),
}


class PoweredRates(NamedTuple):
    lambda_h: float
    lambda_v: float
    mu_h: float
    mu_v: float
    a: float
    delta: float
    nu: float
    gamma: float
    r: float
    rho: float
    eta: float


@dataclass(frozen=True)
class ModelParams:
    """Biological rates (1/day), transmission probabilities, cost weights and alpha."""

    lambda_h: float = 0.0015875
    lambda_v: float = 0.071
    mu_h: float = 0.00004
    mu_v: float = 0.1429
    a: float = 0.29
    b_prob: float = 0.75
    c_prob: float = 0.75
    delta: float = 0.02
    nu: float = 0.0022
    gamma: float = 0.000017
    r: float = 0.05
    rho: float = 0.7
    eta: float = 0.25
    A: float = 100.0
    d1: float = 70.0
    d2: float = 130.0
    d3: float = 40.0
    alpha: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", validate_order(self.alpha))
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value):
                raise DomainError(f"parameter {f.name} must be finite, got {value}")
            if f.name in ("d1", "d2", "d3"):
                if value <= 0:
                    raise DomainError(f"weight {f.name} must be > 0, got {value}")
            elif value < 0:
                raise DomainError(f"parameter {f.name} must be >= 0, got {value}")

    @cached_property
    def powered(self) -> PoweredRates:
        """Rate parameters raised to alpha."""
        return PoweredRates(*(getattr(self, name) ** self.alpha for name in PoweredRates._fields))

    def to_dict(self) -> dict:
        return asdict(self)


def default_params(alpha: float = 1.0) -> ModelParams:
    return ModelParams(alpha=alpha)


def default_initial_state() -> StateVec:
    return StateVec(S_H=800.0, I_H=200.0, R_H=20.0, S_V=1000.0, I_V=500.0)


def total_populations(X) -> Tuple[float, float]:
    S_H, I_H, R_H, S_V, I_V = X
    return S_H + I_H + R_H, S_V + I_V


def _human_total(X) -> float:
    N_H = X[0] + X[1] + X[2]
    if N_H <= 0:
        raise DomainError(f"total human population must be > 0, got N_H={N_H}")
    return N_H


def state_rhs(t: float, X, U, p: ModelParams) -> np.ndarray:
    S_H, I_H, R_H, S_V, I_V = X
    u1, u2, u3 = U
    q = p.powered
    N_H = _human_total(X)
    N_V = S_V + I_V

    human_infection = (1 - u1) * q.a * p.b_prob * S_H * I_V / N_H
    vector_infection = (1 - u1) * q.a * p.c_prob * S_V * I_H / N_H
    recovery = (q.r + q.rho * u2) * I_H

    return np.array([
        q.lambda_h * N_H - human_infection + q.nu * I_H + q.gamma * R_H - q.mu_h * S_H,
        human_infection - q.nu * I_H - recovery - q.delta * I_H - q.mu_h * I_H,
        recovery - (q.gamma + q.mu_h) * R_H,
        (1 - u3) * q.lambda_v * N_V - vector_infection - q.mu_v * S_V - q.eta * u3 * S_V,
        vector_infection - q.mu_v * I_V - q.eta * u3 * I_V,
    ])


def costate_rhs_printed(t: float, X, L, U, p: ModelParams) -> np.ndarray:
    """Costate right-hand sides as printed in the optimality system (gamma_h read as gamma)."""
    S_H, I_H, R_H, S_V, I_V = X
    l1, l2, l3, l4, l5 = L
    u1, u2, u3 = U
    q = p.powered
    N_H = _human_total(X)
    N2 = N_H * N_H
    beta_h = (1 - u1) * q.a * p.b_prob
    beta_v = (1 - u1) * q.a * p.c_prob
    bite = beta_h * S_H * I_V / N2

    return np.array([
        l1 * (q.lambda_h - beta_h * (I_H + R_H) * I_V / N2 - q.mu_h)
        + l2 * (beta_h * (I_H + R_H) * I_V / N2)
        - (l5 - l4) * (beta_v * S_H * I_H / N2),

        p.A + l1 * (q.lambda_h + bite + q.nu)
        - (l4 - l5) * (beta_v * (S_H + R_H) * S_V / N2)
        - l2 * (bite + q.nu + (q.r + q.rho * u2) + q.delta + q.mu_h)
        + l3 * (q.r + q.rho * u2),

        l1 * (q.lambda_h + bite + q.gamma)
        - l2 * bite
        - l3 * (q.gamma + q.mu_h)
        - (l5 - l4) * (beta_v * S_V * I_H / N2),

        l4 * ((1 - u3) * q.lambda_v + beta_v * I_H / N_H - q.mu_v - q.eta * u3)
        + l5 * (beta_v * I_H / N_H),

        (l2 - l1) * (beta_h * S_H / N_H)
        + l4 * ((1 - u3) * q.lambda_v)
        - l5 * (q.mu_v + q.eta * u3),
    ])


def costate_rhs_mechanical(t: float, X, L, U, p: ModelParams) -> np.ndarray:
    """dW/dX + lam^T dM/dX, differentiated from state_rhs term by term."""
    S_H, I_H, R_H, S_V, I_V = X
    l1, l2, l3, l4, l5 = L
    u1, u2, u3 = U
    q = p.powered
    N_H = _human_total(X)
    N2 = N_H * N_H
    beta_h = (1 - u1) * q.a * p.b_prob
    beta_v = (1 - u1) * q.a * p.c_prob

    # partials of S_H I_V / N_H and S_V I_H / N_H
    dF_dS = I_V * (I_H + R_H) / N2
    dF_dI = -S_H * I_V / N2
    dF_dR = -S_H * I_V / N2
    dF_dIV = S_H / N_H
    dG_dS = -S_V * I_H / N2
    dG_dI = S_V * (S_H + R_H) / N2
    dG_dR = -S_V * I_H / N2
    dG_dSV = I_H / N_H
    recovery = q.r + q.rho * u2

    return np.array([
        l1 * (q.lambda_h - beta_h * dF_dS - q.mu_h)
        + l2 * beta_h * dF_dS
        + (l5 - l4) * beta_v * dG_dS,

        p.A + l1 * (q.lambda_h - beta_h * dF_dI + q.nu)
        + l2 * (beta_h * dF_dI - q.nu - recovery - q.delta - q.mu_h)
        + l3 * recovery
        + (l5 - l4) * beta_v * dG_dI,

        l1 * (q.lambda_h - beta_h * dF_dR + q.gamma)
        + l2 * beta_h * dF_dR
        - l3 * (q.gamma + q.mu_h)
        + (l5 - l4) * beta_v * dG_dR,

        l4 * ((1 - u3) * q.lambda_v - beta_v * dG_dSV - q.mu_v - q.eta * u3)
        + l5 * beta_v * dG_dSV,

        (l2 - l1) * beta_h * dF_dIV
        + l4 * (1 - u3) * q.lambda_v
        - l5 * (q.mu_v + q.eta * u3),
    ])


_COSTATES = {
    "paper_eq17": costate_rhs_printed,
    "mechanical_adjoint": costate_rhs_mechanical,
}


def costate_rhs(t: float, X, L, U, p: ModelParams, variant: str = "paper_eq17") -> np.ndarray:
    try:
        rhs = _COSTATES[variant]
    except KeyError:
        raise DomainError(f"unknown costate variant {variant!r}; expected one of {COSTATE_VARIANTS}")
    return rhs(t, X, L, U, p)


def control_characterization(X, L, p: ModelParams, mask: StrategyMask = STRATEGIES["all_controls"]) -> np.ndarray:
    """
    Stationary controls from dW/dU + lam^T dM/dU = 0, clamped to [0, 1];
    channels switched off by the mask are exactly zero.
    """
    S_H, I_H, R_H, S_V, I_V = X
    l1, l2, l3, l4, l5 = L
    q = p.powered
    N_H = _human_total(X)
    N_V = S_V + I_V

    u1 = ((l2 - l1) * q.a * p.b_prob * S_H * I_V / N_H + (l5 - l4) * q.a * p.c_prob * S_V * I_H / N_H) / p.d1
    u2 = (l2 - l3) * q.rho * I_H / p.d2
    u3 = (l4 * (q.lambda_v * N_V + q.eta * S_V) + l5 * q.eta * I_V) / p.d3

    controls = np.clip(np.array([u1, u2, u3], dtype=float), 0.0, 1.0)
    return np.where(np.asarray(mask, dtype=bool), controls, 0.0)


def integrand_W(X, U, p: ModelParams) -> float:
    u1, u2, u3 = U
    return p.A * X[1] + (p.d1 * u1 ** 2 + p.d2 * u2 ** 2 + p.d3 * u3 ** 2) / 2.0


def build_problem(params: ModelParams, mask: StrategyMask, grid: TimeGrid,
                  x0: Optional[StateVec] = None, variant: str = "paper_eq17",
                  scheme: str = "fractional", name: str = "malaria") -> FocpProblem:
    """Wrap the malaria optimality system as a FocpProblem for the sweep."""
    if variant not in COSTATE_VARIANTS:
        raise DomainError(f"unknown costate variant {variant!r}; expected one of {COSTATE_VARIANTS}")
    rhs_lambda = _COSTATES[variant]
    x0 = default_initial_state() if x0 is None else x0

    return FocpProblem(
        state_dim=len(STATE_NAMES),
        control_dim=len(CONTROL_NAMES),
        state_rhs=lambda t, X, U: state_rhs(t, X, U, params),
        costate_rhs=lambda t, X, L, U: rhs_lambda(t, X, L, U, params),
        control_char=lambda t, X, L: control_characterization(X, L, params, mask),
        integrand=lambda t, X, U: integrand_W(X, U, params),
        x0=np.asarray(x0, dtype=float),
        grid=grid,
        alpha=params.alpha,
        scheme=scheme,
        nonnegative=True,
        active_controls=tuple(bool(m) for m in mask),
        name=name,
    )
