# tools/fractional.py

"""
Fractional-order helpers used by the sweep engine.
These are pure math helpers:
- gamma()
- mittag_leffler()
- gen_euler_forward()
- gen_euler_backward()

Orders are Caputo orders 0 < alpha <= 1. Trajectories are numpy arrays of
shape (n_steps + 1, dim), one row per grid node.
"""

from dataclasses import dataclass
from typing import Callable, Optional
import math

import mpmath
import numpy as np
from scipy import special

from core.errors import DomainError, NumericalBlowupError, SeriesNotConvergedError

FracOrder = float
SCHEMES = ("fractional", "local")

# |z| bound of the Mittag-Leffler series and its term budget
ML_MAX_ABS_Z = 50.0
ML_MAX_TERMS = 4000
# the series stops once a term past the peak drops below 10^-ML_CUTOFF_DIGITS
ML_CUTOFF_DIGITS = 25


def validate_order(alpha: float) -> FracOrder:
    """Return alpha as a float, rejecting anything outside 0 < alpha <= 1."""
    try:
        value = float(alpha)
    except (TypeError, ValueError):
        raise DomainError(f"fractional order must be a real number, got {alpha!r}")
    if not math.isfinite(value) or not 0.0 < value <= 1.0:
        raise DomainError(f"fractional order must satisfy 0 < alpha <= 1, got {alpha!r}")
    return value


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = t0 + k*h on [t0, tf]."""

    t0: float
    tf: float
    n_steps: int

    def __post_init__(self):
        if isinstance(self.n_steps, bool) or int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise DomainError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        if not (math.isfinite(self.t0) and math.isfinite(self.tf)) or self.tf <= self.t0:
            raise DomainError(f"grid needs finite t0 < tf, got [{self.t0}, {self.tf}]")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @classmethod
    def from_horizon(cls, horizon: float, n_steps: int) -> "TimeGrid":
        return cls(0.0, float(horizon), n_steps)

    @property
    def h(self) -> float:
        return (self.tf - self.t0) / self.n_steps

    @property
    def nodes(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n_steps + 1)

    def index_of(self, t: float) -> int:
        """Index of the grid node closest to t."""
        k = int(round((t - self.t0) / self.h))
        if not 0 <= k <= self.n_steps:
            raise DomainError(f"t={t} lies outside the grid [{self.t0}, {self.tf}]")
        return k


def gamma(x: float) -> float:
    """
    Gamma function on the positive reals.
    Raises DomainError for x <= 0 or non-finite x.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"gamma is only evaluated for x > 0, got {x}")
    return float(special.gamma(x))


def _ml_working_digits(alpha: float, abs_z: float, max_terms: int):
    """
    Decimal digits of the largest series term, the index where it sits and
    the log10 size of the last term the budget allows.
    """
    k = np.arange(max_terms, dtype=float)
    log10_terms = (k * math.log(abs_z) - special.gammaln(alpha * k + 1.0)) / math.log(10.0)
    peak = int(np.argmax(log10_terms))
    return max(0.0, float(log10_terms[peak])), peak, float(log10_terms[-1])


def mittag_leffler(alpha: float, z: float, max_terms: int = ML_MAX_TERMS) -> float:
    """
    One-parameter Mittag-Leffler function E_alpha(z) = sum z^k / Gamma(alpha*k + 1).

    The series is summed in mpmath with the working precision raised by the
    size of the largest term, so the cancellation for negative z costs nothing
    in the double result. Accepted domain: |z| <= 50. For small alpha at large
    |z| the term budget cannot reach the cutoff; that is detected from the term
    sizes before any summing and raises SeriesNotConvergedError.
    """
    alpha = validate_order(alpha)
    z = float(z)
    if not math.isfinite(z) or abs(z) > ML_MAX_ABS_Z:
        raise DomainError(f"mittag_leffler needs finite |z| <= {ML_MAX_ABS_Z}, got {z}")
    if z == 0.0:
        return 1.0

    digits, peak, last = _ml_working_digits(alpha, abs(z), max_terms)
    # terms shrink monotonically past the peak, so the budget either reaches
    # the cutoff at its last term or never does
    if peak >= max_terms - 1 or last >= -ML_CUTOFF_DIGITS:
        raise SeriesNotConvergedError(
            f"Mittag-Leffler series for alpha={alpha}, z={z} needs more than {max_terms} terms "
            f"(largest term at index {peak}, last term about 1e{last:.0f})"
        )

    with mpmath.workdps(int(math.ceil(digits)) + 30):
        zm = mpmath.mpf(z)
        am = mpmath.mpf(alpha)
        cutoff = mpmath.mpf(10) ** -ML_CUTOFF_DIGITS
        total = mpmath.mpf(0)
        power = mpmath.mpf(1)
        for k in range(max_terms):
            term = power / mpmath.gamma(am * k + 1)
            total += term
            if k > peak and abs(term) < cutoff:
                return float(total)
            power *= zm

    raise SeriesNotConvergedError(
        f"Mittag-Leffler series for alpha={alpha}, z={z} did not stabilise in {max_terms} terms"
    )


def step_factor(h: float, alpha: float) -> float:
    """h^alpha / Gamma(alpha + 1), the increment of the generalized Euler step."""
    return h ** alpha / gamma(alpha + 1.0)


def memory_weights(n_steps: int, alpha: float) -> np.ndarray:
    """w_m = (m+1)^alpha - m^alpha for m = 0..n_steps; all ones when alpha = 1."""
    m = np.arange(n_steps + 1, dtype=float)
    return (m + 1.0) ** alpha - m ** alpha


def _march(field: Callable[[int, np.ndarray], np.ndarray], x0, times: np.ndarray,
           h: float, alpha: float, scheme: str, label: str) -> np.ndarray:
    if scheme not in SCHEMES:
        raise DomainError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")

    start = np.array(x0, dtype=float, copy=True).reshape(-1)
    if not np.all(np.isfinite(start)):
        raise NumericalBlowupError(f"[{label}] initial vector is not finite", step=0, time=float(times[0]))

    n = len(times) - 1
    traj = np.empty((n + 1, start.size))
    traj[0] = start
    c = step_factor(h, alpha)

    if scheme == "fractional":
        history = np.empty((n, start.size))
        weights = memory_weights(n, alpha)

    for k in range(n):
        fk = np.asarray(field(k, traj[k]), dtype=float).reshape(-1)
        if fk.shape != start.shape:
            raise DomainError(f"[{label}] right-hand side returned shape {fk.shape}, expected {start.shape}")

        if scheme == "local":
            nxt = traj[k] + c * fk
        else:
            history[k] = fk
            nxt = start + c * (weights[k::-1] @ history[:k + 1])

        if not np.all(np.isfinite(nxt)):
            raise NumericalBlowupError(
                f"[{label}] non-finite value at step {k + 1} (t={times[k + 1]:.6g})",
                step=k + 1, time=float(times[k + 1]),
            )
        traj[k + 1] = nxt

    return traj


def gen_euler_forward(rhs: Callable[[float, np.ndarray], np.ndarray], x0, grid: TimeGrid,
                      alpha: float, scheme: str = "fractional") -> np.ndarray:
    """
    Solve the left-Caputo initial value problem D^alpha x = f(t, x), x(t0) = x0.

    With scheme="local" every step is x_{k+1} = x_k + h^a/G(a+1) f(t_k, x_k).
    The default "fractional" scheme carries the Caputo memory,
    x_{k+1} = x_0 + h^a/G(a+1) sum_j [(k+1-j)^a - (k-j)^a] f(t_j, x_j),
    which has the same first step and is identical to it for alpha = 1.
    """
    alpha = validate_order(alpha)
    nodes = grid.nodes
    return _march(lambda k, x: rhs(nodes[k], x), x0, nodes, grid.h, alpha, scheme, "forward")


def gen_euler_backward(rhs: Callable[[float, np.ndarray, np.ndarray], np.ndarray], terminal,
                       grid: TimeGrid, alpha: float, state_traj,
                       scheme: str = "fractional") -> np.ndarray:
    """
    Solve a terminal value problem from t = tf down to t0 by the substitution
    s = tf - t, which turns the right-Caputo derivative into a left one.

    rhs is the forward-time field g(t, x, lam) of the multiplier: the backward
    update is lam_k = lam_{k+1} - h^a/G(a+1) g(t_{k+1}, x_{k+1}, lam_{k+1})
    (plus memory for the fractional scheme). A right-Caputo system
    tD^alpha_b lam = G is therefore passed as rhs = -G.
    """
    alpha = validate_order(alpha)
    states = np.asarray(state_traj, dtype=float)
    n = grid.n_steps
    if states.shape[0] != n + 1:
        raise DomainError(f"state trajectory has {states.shape[0]} nodes, grid has {n + 1}")

    nodes = grid.nodes

    def reversed_field(j, lam):
        return -np.asarray(rhs(nodes[n - j], states[n - j], lam), dtype=float)

    reversed_traj = _march(reversed_field, terminal, nodes[::-1], grid.h, alpha, scheme, "backward")
    return reversed_traj[::-1].copy()
