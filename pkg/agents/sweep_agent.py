# agents/sweep_agent.py
"""
SweepAgent

Runs one (strategy, alpha) cell of the scenario matrix:
- builds the malaria optimality system for the cell
- runs the forward-backward sweep
- writes the trajectory CSV
- returns a RunRecord (failures are recorded, never raised)
"""

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Optional
import logging

from core.config import ScenarioConfig
from core.errors import MalariaOCPError, SweepNotConvergedError
from core.malaria import STRATEGIES, build_problem
from core.sweep import sweep
from tools.csv_io import write_trajectory_csv

logger = logging.getLogger(__name__)

TRAJECTORY_DIR = "trajectories"


@dataclass(frozen=True)
class MatrixCell:
    strategy: str
    alpha: float
    config: ScenarioConfig

    @property
    def label(self) -> str:
        return f"{self.strategy}__alpha_{self.alpha:g}"


@dataclass
class RunRecord:
    strategy: str
    alpha: float
    converged: bool
    iterations: int
    J: Optional[float]
    final_I_H: Optional[float]
    final_I_V: Optional[float]
    paths: Dict[str, str] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return not self.converged

    def summary_row(self) -> dict:
        return {
            "strategy": self.strategy,
            "alpha": self.alpha,
            "converged": self.converged,
            "iterations": self.iterations,
            "J": self.J,
            "final_I_H": self.final_I_H,
            "final_I_V": self.final_I_V,
        }

    def to_dict(self) -> dict:
        return asdict(self)


def trajectory_path(output_dir, cell: MatrixCell) -> Path:
    return Path(output_dir) / TRAJECTORY_DIR / f"{cell.label}.csv"


class SweepAgent:
    def __init__(self, output_dir=None):
        self.output_dir = output_dir

    def run(self, cell: MatrixCell) -> RunRecord:
        config = cell.config
        output_dir = self.output_dir or config.output_dir

        error = None
        try:
            problem = build_problem(
                params=config.params_for(cell.alpha),
                mask=STRATEGIES[cell.strategy],
                grid=config.grid,
                x0=config.initial_state,
                variant=config.costate_variant,
                scheme=config.scheme,
                name=cell.label,
            )
            solution = sweep(problem, config.sweep)
        except SweepNotConvergedError as e:
            logger.warning(f"[SweepAgent] {cell.label}: {e}")
            solution, error = e.solution, str(e)
        except MalariaOCPError as e:
            logger.warning(f"[SweepAgent] {cell.label} failed: {e}")
            return self._failed(cell, str(e))

        try:
            csv_path = write_trajectory_csv(
                trajectory_path(output_dir, cell),
                solution.grid.nodes, solution.states, solution.controls, solution.costates,
            )
        except OSError as e:
            logger.error(f"[SweepAgent] {cell.label}: could not write trajectory: {e}")
            return self._failed(cell, f"could not write trajectory: {e}", solution.iterations)

        record = RunRecord(
            strategy=cell.strategy,
            alpha=cell.alpha,
            converged=solution.converged,
            iterations=solution.iterations,
            J=solution.objective,
            final_I_H=float(solution.states[-1, 1]),
            final_I_V=float(solution.states[-1, 4]),
            paths={"trajectory": str(csv_path)},
            error=error,
        )
        logger.info(f"[SweepAgent] {cell.label}: J={record.J:.6g} in {record.iterations} iterations")
        return record

    @staticmethod
    def _failed(cell: MatrixCell, error: str, iterations: int = 0) -> RunRecord:
        return RunRecord(cell.strategy, cell.alpha, False, iterations, None, None, None, error=error)


def run_cell(cell: MatrixCell) -> RunRecord:
    """Process-pool entry point."""
    return SweepAgent().run(cell)
