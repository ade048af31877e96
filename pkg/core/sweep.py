"""
Forward-backward sweep for fractional optimal control problems.

One iteration solves the state system forward with the current controls,
the costate system backward along the fresh states, evaluates the control
characterization node by node and relaxes the controls towards it. The loop
stops on the relative criterion tol * sum|u_new| - sum|u_new - u_old| >= 0,
checked per control channel.

The mixing weight starts at SweepConfig.relaxation and is halved whenever
the largest per-channel change has not improved for stall_window
iterations, down to min_relaxation. A damped step moves the controls less,
so the change is measured at the starting weight: the criterion always reads
relaxation * sum|u_candidate - u_old| whatever the current weight is.
"""

from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple, Union
import logging

import numpy as np
from scipy import integrate

from core.errors import DomainError, NegativeStateError, SweepNotConvergedError
from tools.fractional import SCHEMES, TimeGrid, gen_euler_backward, gen_euler_forward, validate_order

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-3
DEFAULT_MAX_ITERATIONS = 500
DEFAULT_RELAXATION = 0.5
DEFAULT_STALL_WINDOW = 10
DEFAULT_MIN_RELAXATION = 1.0 / 64


@dataclass(frozen=True)
class FocpProblem:
    """
    Minimise J(U) = int W(t, X, U) dt subject to D^alpha X = f(t, X, U), X(t0) = x0.

    costate_rhs returns the right-Caputo right-hand side dW/dX + lam^T dM/dX;
    control_char returns already projected controls.
    """

    state_dim: int
    control_dim: int
    state_rhs: Callable
    costate_rhs: Callable
    control_char: Callable
    integrand: Callable
    x0: np.ndarray
    grid: TimeGrid
    alpha: float
    scheme: str = "fractional"
    nonnegative: bool = False
    active_controls: Optional[Tuple[bool, ...]] = None
    name: str = "focp"

    def __post_init__(self):
        x0 = np.array(self.x0, dtype=float).reshape(-1)
        if self.state_dim < 1 or self.control_dim < 1:
            raise DomainError("state_dim and control_dim must be positive")
        if x0.size != self.state_dim:
            raise DomainError(f"x0 has {x0.size} components, state_dim is {self.state_dim}")
        if self.active_controls is not None and len(self.active_controls) != self.control_dim:
            raise DomainError("active_controls must have one flag per control channel")
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {self.scheme!r}")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "alpha", validate_order(self.alpha))


@dataclass(frozen=True)
class SweepConfig:
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    relaxation: float = DEFAULT_RELAXATION
    initial_controls: Union[float, Sequence[float], np.ndarray] = 0.0
    stall_window: int = DEFAULT_STALL_WINDOW
    min_relaxation: float = DEFAULT_MIN_RELAXATION

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError(f"tolerance must be > 0, got {self.tolerance}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise DomainError(f"max_iterations must be a positive integer, got {self.max_iterations}")
        if not 0 < self.relaxation <= 1:
            raise DomainError(f"relaxation must lie in (0, 1], got {self.relaxation}")
        if int(self.stall_window) != self.stall_window or self.stall_window < 1:
            raise DomainError(f"stall_window must be a positive integer, got {self.stall_window}")
        if not 0 < self.min_relaxation <= 1:
            raise DomainError(f"min_relaxation must lie in (0, 1], got {self.min_relaxation}")

    def initial_trajectory(self, grid: TimeGrid, control_dim: int) -> np.ndarray:
        """Constant, per-channel constant or full (n_steps+1, control_dim) initial controls."""
        init = np.asarray(self.initial_controls, dtype=float)
        shape = (grid.n_steps + 1, control_dim)
        if init.ndim == 0 or init.shape == (control_dim,):
            return np.broadcast_to(init, shape).astype(float)
        if init.shape != shape:
            raise DomainError(f"initial controls have shape {init.shape}, expected {shape}")
        return init.copy()


class SweepIterate(NamedTuple):
    """Relative change per channel after one iteration, and the weight that produced it."""

    change: np.ndarray
    relaxation: float


@dataclass
class SweepSolution:
    grid: TimeGrid
    states: np.ndarray
    costates: np.ndarray
    controls: np.ndarray
    objective: float
    iterations: int
    converged: bool
    convergence_history: List[SweepIterate] = field(default_factory=list)
    relaxation: float = DEFAULT_RELAXATION


def objective_value(integrand: Callable, grid: TimeGrid, states, controls) -> float:
    """Composite trapezoidal rule for int W(t, X(t), U(t)) dt over the grid."""
    states = np.asarray(states, dtype=float)
    controls = np.asarray(controls, dtype=float)
    nodes = grid.nodes
    if states.shape[0] != nodes.size or controls.shape[0] != nodes.size:
        raise DomainError("states and controls must live on the objective grid")

    values = np.array([integrand(t, x, u) for t, x, u in zip(nodes, states, controls)], dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError("objective integrand is not finite on the trajectory")
    return float(integrate.trapezoid(values, x=nodes))


def control_change(u_new: np.ndarray, u_old: np.ndarray, tolerance: float,
                   scale: float = 1.0) -> Tuple[bool, np.ndarray]:
    """
    Per-channel relative criterion. Returns (all channels pass, relative change
    scale * sum|u_new - u_old| / sum|u_new| per channel).
    """
    size = np.sum(np.abs(u_new), axis=0)
    diff = scale * np.sum(np.abs(u_new - u_old), axis=0)
    passed = bool(np.all(tolerance * size - diff >= 0))
    with np.errstate(divide="ignore", invalid="ignore"):
        relative = np.where(size > 0, diff / np.where(size > 0, size, 1.0), np.where(diff > 0, np.inf, 0.0))
    return passed, relative


def _mask_inactive(problem: FocpProblem, controls: np.ndarray) -> np.ndarray:
    if problem.active_controls is not None:
        controls[:, ~np.asarray(problem.active_controls, dtype=bool)] = 0.0
    return controls


def solve_states(problem: FocpProblem, controls: np.ndarray) -> np.ndarray:
    grid = problem.grid

    def rhs(t, x):
        return problem.state_rhs(t, x, controls[grid.index_of(t)])

    states = gen_euler_forward(rhs, problem.x0, grid, problem.alpha, problem.scheme)
    if problem.nonnegative and np.any(states < 0):
        k, channel = np.argwhere(states < 0)[0]
        raise NegativeStateError(
            f"[Sweep] state component {channel} of {problem.name} went negative "
            f"({states[k, channel]:.3e}) at t={grid.nodes[k]:.6g}; refine the grid (n_steps)",
            step=int(k), time=float(grid.nodes[k]),
        )
    return states


def solve_costates(problem: FocpProblem, states: np.ndarray, controls: np.ndarray) -> np.ndarray:
    grid = problem.grid

    # the right-Caputo system tD^a_b lam = G marches backward as lam' = -G
    def rhs(t, x, lam):
        return -np.asarray(problem.costate_rhs(t, x, lam, controls[grid.index_of(t)]), dtype=float)

    terminal = np.zeros(problem.state_dim)
    return gen_euler_backward(rhs, terminal, grid, problem.alpha, states, problem.scheme)


def candidate_controls(problem: FocpProblem, states: np.ndarray, costates: np.ndarray) -> np.ndarray:
    nodes = problem.grid.nodes
    cand = np.array([problem.control_char(t, x, lam) for t, x, lam in zip(nodes, states, costates)],
                    dtype=float).reshape(nodes.size, -1)
    if cand.shape[1] != problem.control_dim:
        raise DomainError(f"control_char returned {cand.shape[1]} channels, control_dim is {problem.control_dim}")
    return _mask_inactive(problem, cand)


def sweep_step(problem: FocpProblem, controls: np.ndarray, config: SweepConfig,
               relaxation: Optional[float] = None):
    """
    One forward-backward iteration: (states, costates, relaxed controls, passed, change).

    relaxation overrides the mixing weight; the change is still reported at
    config.relaxation.
    """
    weight = config.relaxation if relaxation is None else relaxation
    states = solve_states(problem, controls)
    costates = solve_costates(problem, states, controls)
    cand = candidate_controls(problem, states, costates)
    relaxed = weight * cand + (1.0 - weight) * controls
    passed, change = control_change(relaxed, controls, config.tolerance, scale=config.relaxation / weight)
    return states, costates, relaxed, passed, change


class RelaxationSchedule:
    """Mixing weight that halves when the largest channel change stalls for `window` iterations."""

    def __init__(self, relaxation: float, window: int, floor: float):
        self.weight = relaxation
        self.window = window
        self.floor = min(floor, relaxation)
        self.best = np.inf
        self.stalled = 0

    def update(self, change: np.ndarray) -> float:
        worst = float(np.max(change))
        if worst < self.best:
            self.best, self.stalled = worst, 0
            return self.weight
        self.stalled += 1
        if self.stalled >= self.window and self.weight > self.floor:
            self.weight, self.stalled = max(self.weight / 2, self.floor), 0
        return self.weight


def _assemble(problem: FocpProblem, controls, iterations, converged, history, relaxation) -> SweepSolution:
    states = solve_states(problem, controls)
    costates = solve_costates(problem, states, controls)
    objective = objective_value(problem.integrand, problem.grid, states, controls)
    return SweepSolution(
        grid=problem.grid,
        states=states,
        costates=costates,
        controls=controls,
        objective=objective,
        iterations=iterations,
        converged=converged,
        convergence_history=history,
        relaxation=relaxation,
    )


def sweep(problem: FocpProblem, config: Optional[SweepConfig] = None) -> SweepSolution:
    """
    Run the forward-backward sweep until the controls settle.

    The returned states and costates are recomputed from the final controls,
    so X(t0) = x0 and lam(tf) = 0 hold exactly.
    Raises SweepNotConvergedError (carrying the partial solution) after
    max_iterations; numerical blowups propagate.
    """
    config = config or SweepConfig()
    controls = _mask_inactive(problem, config.initial_trajectory(problem.grid, problem.control_dim))
    schedule = RelaxationSchedule(config.relaxation, config.stall_window, config.min_relaxation)
    weight = schedule.weight

    history: List[SweepIterate] = []
    for iteration in range(1, config.max_iterations + 1):
        _, _, controls_new, passed, change = sweep_step(problem, controls, config, relaxation=weight)
        history.append(SweepIterate(change, weight))
        controls = controls_new
        logger.debug(f"[Sweep] {problem.name} iteration {iteration}: relative change "
                     f"{np.round(change, 8).tolist()} at relaxation {weight:g}")
        if passed:
            logger.info(f"[Sweep] {problem.name} converged after {iteration} iterations")
            return _assemble(problem, controls, iteration, True, history, weight)

        if schedule.update(change) < weight:
            weight = schedule.weight
            logger.info(f"[Sweep] {problem.name}: change stuck near {schedule.best:.3g} at iteration {iteration}; "
                        f"relaxation lowered to {weight:g}")

    partial = _assemble(problem, controls, config.max_iterations, False, history, weight)
    raise SweepNotConvergedError(
        f"[Sweep] {problem.name} did not converge in {config.max_iterations} iterations "
        f"(last relative change {np.round(history[-1].change, 6).tolist()} at relaxation {weight:g})",
        solution=partial,
    )


def refinement_study(build_problem: Callable[[int], FocpProblem], n_steps_list: Sequence[int],
                     config: Optional[SweepConfig] = None) -> List[dict]:
    """Converged objective for each grid size, plus the change from the previous grid."""
    rows = []
    previous = None
    for n_steps in n_steps_list:
        solution = sweep(build_problem(n_steps), config)
        change = None if previous is None else solution.objective - previous
        rows.append({
            "n_steps": n_steps,
            "objective": solution.objective,
            "iterations": solution.iterations,
            "change": change,
        })
        logger.info(f"[Sweep] n_steps={n_steps}: J={solution.objective:.6g}")
        previous = solution.objective
    return rows
