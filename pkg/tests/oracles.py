"""
Independent reference implementations for the test suite.

Nothing in the library imports this module.
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath
import numpy as np
import pandas as pd

from core.malaria import COSTATE_NAMES, integrand_W, state_rhs


@dataclass
class OracleReport:
    case: str
    production: np.ndarray
    oracle: np.ndarray
    max_abs: float
    max_rel: float
    passed: bool

    @classmethod
    def compare(cls, case: str, production, oracle, rel_tol: float, floor: float = 1.0) -> "OracleReport":
        production = np.atleast_1d(np.asarray(production, dtype=float))
        oracle = np.atleast_1d(np.asarray(oracle, dtype=float))
        max_abs = float(np.max(np.abs(production - oracle)))
        max_rel = max_abs / max(floor, float(np.max(np.abs(oracle))))
        return cls(case, production, oracle, max_abs, max_rel, bool(max_rel <= rel_tol))


def gamma_reference(x: float) -> float:
    with mpmath.workdps(40):
        return float(mpmath.gamma(mpmath.mpf(x)))


def mittag_leffler_reference(alpha: float, z: float, terms: int = 400, dps: int = 60) -> float:
    """Direct series at extended precision."""
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        zm = mpmath.mpf(z)
        return float(mpmath.fsum(zm ** k / mpmath.gamma(a * k + 1) for k in range(terms)))


def rk4_reference(rhs: Callable, x0, grid) -> np.ndarray:
    """Classical fourth-order Runge-Kutta on the nodes of grid (integer order only)."""
    nodes = grid.nodes
    h = grid.h
    traj = np.empty((nodes.size, np.size(x0)))
    traj[0] = np.asarray(x0, dtype=float)
    for k in range(grid.n_steps):
        t, x = nodes[k], traj[k]
        k1 = np.asarray(rhs(t, x))
        k2 = np.asarray(rhs(t + h / 2, x + h / 2 * k1))
        k3 = np.asarray(rhs(t + h / 2, x + h / 2 * k2))
        k4 = np.asarray(rhs(t + h, x + h * k3))
        nxt = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(nxt)):
            raise FloatingPointError(f"rk4 blew up at step {k + 1}")
        traj[k + 1] = nxt
    return traj


def adjoint_fd_oracle(X, L, U, params, epsilon: float = 1e-6) -> np.ndarray:
    """dW/dX + lam^T dM/dX by central differences, step epsilon * max(1, |x_i|)."""
    if not 1e-7 <= epsilon <= 1e-4:
        raise ValueError("epsilon must lie in [1e-7, 1e-4]")
    X = np.asarray(X, dtype=float)
    L = np.asarray(L, dtype=float)
    out = np.empty(X.size)
    for i in range(X.size):
        step = epsilon * max(1.0, abs(X[i]))
        up, down = X.copy(), X.copy()
        up[i] += step
        down[i] -= step
        dW = (integrand_W(up, U, params) - integrand_W(down, U, params)) / (2 * step)
        dM = (state_rhs(0.0, up, U, params) - state_rhs(0.0, down, U, params)) / (2 * step)
        out[i] = dW + L @ dM
    return out


def classical_rhs(X, U, p) -> np.ndarray:
    """Integer-order host-vector model with bednet, treatment and spray terms."""
    S, I, R, Sv, Iv = X
    u1, u2, u3 = U
    N = S + I + R
    Nv = Sv + Iv
    force_h = (1 - u1) * p.a * p.b_prob * Iv / N
    force_v = (1 - u1) * p.a * p.c_prob * I / N
    dS = p.lambda_h * N - force_h * S + p.nu * I + p.gamma * R - p.mu_h * S
    dI = force_h * S - (p.nu + p.r + p.rho * u2 + p.delta + p.mu_h) * I
    dR = (p.r + p.rho * u2) * I - (p.gamma + p.mu_h) * R
    dSv = (1 - u3) * p.lambda_v * Nv - force_v * Sv - (p.mu_v + p.eta * u3) * Sv
    dIv = force_v * Sv - (p.mu_v + p.eta * u3) * Iv
    return np.array([dS, dI, dR, dSv, dIv])


def random_inputs(rng: np.random.Generator, count: int):
    """Finite (X, L, U) triples with positive human population."""
    for _ in range(count):
        X = rng.uniform(1.0, 2000.0, size=5)
        L = rng.uniform(-200.0, 200.0, size=5)
        U = rng.uniform(0.0, 1.0, size=3)
        yield X, L, U


def write_discrepancy_ledger(path, rows: Sequence[dict]) -> pd.DataFrame:
    columns = ["case"] + [f"printed_{n}" for n in COSTATE_NAMES] + [f"mechanical_{n}" for n in COSTATE_NAMES] \
        + [f"deviation_{n}" for n in COSTATE_NAMES]
    frame = pd.DataFrame(list(rows), columns=columns)
    frame.to_csv(path, index=False)
    return frame
