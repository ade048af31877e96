# agents/plot_agent.py
"""
PlotAgent

Turns the trajectory CSVs of a finished matrix into the figure set:
infected humans and infected mosquitoes per strategy (one panel per alpha,
with the no-control run dashed) and the optimal controls of the
all-controls strategy.
"""

from pathlib import Path
from typing import Dict, List
import logging

from core.errors import MalariaOCPError
from core.malaria import BASELINE
from tools.plotting import emit_alpha_panels, figure_plan

logger = logging.getLogger(__name__)

FIGURE_DIR = "figures"


class PlotAgent:
    def run(self, records, output_dir) -> Dict[str, str]:
        csvs: Dict[str, Dict[float, str]] = {}
        for record in records:
            path = record.paths.get("trajectory")
            if path:
                csvs.setdefault(record.strategy, {})[record.alpha] = path

        baseline = csvs.get(BASELINE, {})
        strategies: List[str] = [s for s in csvs if s != BASELINE]
        figures = {}

        for name, spec in figure_plan(strategies).items():
            by_alpha = csvs.get(spec["strategy"], {})
            if not by_alpha:
                continue
            out_path = Path(output_dir) / FIGURE_DIR / f"{name}.svg"
            try:
                emit_alpha_panels(
                    by_alpha, spec["channels"], out_path, spec["title"],
                    baseline_by_alpha=baseline if spec["baseline"] else None,
                )
            except (MalariaOCPError, OSError) as e:
                logger.warning(f"[PlotAgent] skipped {name}: {e}")
                continue
            figures[name] = str(out_path)

        logger.info(f"[PlotAgent] wrote {len(figures)} figures")
        return figures
