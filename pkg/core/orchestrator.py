from concurrent.futures import ProcessPoolExecutor
from datetime import datetime
from typing import List
import logging

from agents.plot_agent import PlotAgent
from agents.report_agent import ReportAgent
from agents.sweep_agent import MatrixCell, RunRecord, SweepAgent, run_cell
from core.config import ScenarioConfig
from core.malaria import BASELINE
from core.memory_manager import MemoryManager

logger = logging.getLogger(__name__)


def build_cells(config: ScenarioConfig) -> List[MatrixCell]:
    """One cell per (strategy, alpha) plus a no-control baseline per alpha."""
    cells = []
    for alpha in config.alphas:
        if BASELINE not in config.strategies:
            cells.append(MatrixCell(BASELINE, alpha, config))
        for strategy in config.strategies:
            cells.append(MatrixCell(strategy, alpha, config))
    return cells


def _run_cells(cells: List[MatrixCell], workers: int) -> List[RunRecord]:
    if workers <= 1 or len(cells) <= 1:
        agent = SweepAgent()
        return [agent.run(cell) for cell in cells]

    records = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_cell, cell) for cell in cells]
        for cell, future in zip(cells, futures):
            try:
                records.append(future.result())
            except Exception as e:  # worker crashed outside the agent's own handling
                logger.warning(f"[Orchestrator] {cell.label} crashed: {e}")
                records.append(RunRecord(cell.strategy, cell.alpha, False, 0, None, None, None, error=repr(e)))
    return records


def run_matrix(config: ScenarioConfig) -> List[RunRecord]:
    logger.info("[Orchestrator] Starting strategy x alpha matrix...")
    output_dir = config.output_dir
    output_dir.mkdir(parents=True, exist_ok=True)

    # 1. Sweeps
    cells = build_cells(config)
    logger.info(f"[Orchestrator] {len(cells)} cells, {config.workers} worker(s), n_steps={config.n_steps}")
    records = _run_cells(cells, config.workers)
    failed = [r for r in records if r.failed]
    logger.info(f"[Orchestrator] sweeps complete ({len(failed)} failed)")

    # 2. Summary, comparison and report
    report = ReportAgent(pdf=config.report).run(records, output_dir)
    logger.info("\n" + report["report_text"])

    # 3. Figures
    figures = PlotAgent().run(records, output_dir) if config.plots else {}

    # 4. Run history
    memory = MemoryManager(output_dir)
    memory.add_run({
        "config": config.to_dict(),
        "records": [r.to_dict() for r in records],
        "report": {k: v for k, v in report.items() if k != "report_text"},
        "figures": figures,
    })
    memory.append_to_memory_bank({
        "timestamp": str(datetime.now()),
        "output_dir": str(output_dir),
        "cells": len(records),
        "failed": len(failed),
        "best_strategy": {f"{alpha:g}": name for alpha, name in report["best_strategy"].items()},
    })

    logger.info("[Orchestrator] Matrix complete; batch saved in run history.")
    return records
