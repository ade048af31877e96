from dataclasses import replace
import json

import numpy as np
import pandas as pd
import pytest

from agents.sweep_agent import MatrixCell, SweepAgent, trajectory_path
from core.config import ScenarioConfig
from core.malaria import BASELINE
from core.orchestrator import build_cells, run_matrix
from core.sweep import SweepConfig

TRAJECTORY_HEADER = "t,S_H,I_H,R_H,S_V,I_V,u1,u2,u3,lambda1,lambda2,lambda3,lambda4,lambda5"
SUMMARY_HEADER = "strategy,alpha,converged,iterations,J,final_I_H,final_I_V"


def header(path):
    with open(path, encoding="utf-8") as f:
        return f.readline().rstrip("\n")


# ---------- matrix layout ----------

def test_default_matrix_has_32_cells():
    cells = build_cells(ScenarioConfig())
    assert len(cells) == 32
    assert sum(c.strategy == BASELINE for c in cells) == 4
    assert {c.alpha for c in cells} == {1.0, 0.99, 0.95, 0.90}


def test_configured_baseline_is_not_duplicated():
    config = ScenarioConfig(alphas=(1.0,), strategies=("spray", BASELINE))
    assert [c.strategy for c in build_cells(config)] == ["spray", BASELINE]


def test_cell_label_and_path(tmp_path):
    cell = MatrixCell("bednets_spray", 0.95, ScenarioConfig())
    assert cell.label == "bednets_spray__alpha_0.95"
    assert trajectory_path(tmp_path, cell) == tmp_path / "trajectories" / "bednets_spray__alpha_0.95.csv"


# ---------- a small batch ----------

@pytest.fixture
def small_run(small_config):
    return small_config, run_matrix(small_config)


def test_small_batch_writes_every_artifact(small_run):
    config, records = small_run
    out = config.output_dir

    assert len(records) == 4
    assert all(r.converged for r in records)
    for r in records:
        path = out / "trajectories" / f"{r.strategy}__alpha_{r.alpha:g}.csv"
        assert r.paths["trajectory"] == str(path)
        assert header(path) == TRAJECTORY_HEADER
        assert len(pd.read_csv(path)) == config.n_steps + 1

    assert header(out / "summary.csv") == SUMMARY_HEADER
    summary = pd.read_csv(out / "summary.csv")
    assert len(summary) == 4
    assert (out / "comparison.csv").exists()
    assert (out / "report.pdf").read_bytes().startswith(b"%PDF")

    figures = sorted(p.name for p in (out / "figures").glob("*.svg"))
    assert figures == sorted([
        "I_H_all_controls.svg", "I_V_all_controls.svg", "controls_u1.svg",
        "controls_u2.svg", "controls_u3.svg", "controls_u1_u2_u3.svg",
    ])

    session = json.loads((out / "memory" / "session.json").read_text())
    assert len(session["runs"]) == 1
    bank = json.loads((out / "memory" / "memory_bank.json").read_text())
    assert bank[0]["cells"] == 4 and bank[0]["failed"] == 0


def test_controls_reduce_the_burden(small_run):
    _, records = small_run
    by_key = {(r.strategy, r.alpha): r for r in records}
    for alpha in (1.0, 0.9):
        controlled, baseline = by_key[("all_controls", alpha)], by_key[(BASELINE, alpha)]
        assert controlled.J <= baseline.J + 1e-9
        assert controlled.final_I_H <= baseline.final_I_H + 1e-9


def test_baseline_objective_is_the_infection_integral(small_run):
    config, records = small_run
    baseline = next(r for r in records if r.strategy == BASELINE and r.alpha == 1.0)
    frame = pd.read_csv(baseline.paths["trajectory"])
    assert (frame[["u1", "u2", "u3"]].to_numpy() == 0).all()
    I_H = frame["I_H"].to_numpy()
    by_hand = config.grid.h * (I_H.sum() - 0.5 * (I_H[0] + I_H[-1]))
    assert baseline.J == pytest.approx(100.0 * by_hand, rel=1e-9)


def test_rerun_is_byte_identical(small_config, tmp_path):
    first = small_config
    second = replace(small_config, output_dir=tmp_path / "again")
    run_matrix(first)
    run_matrix(second)

    names = [p.relative_to(first.output_dir) for p in first.output_dir.rglob("*.csv")]
    assert len(names) == 6
    for name in names:
        assert (first.output_dir / name).read_bytes() == (second.output_dir / name).read_bytes(), name


def test_worker_pool_matches_serial_run(small_config, tmp_path):
    serial = run_matrix(replace(small_config, plots=False, report=False))
    pooled = run_matrix(replace(small_config, plots=False, report=False, workers=2,
                                output_dir=tmp_path / "pooled"))
    key = lambda r: (r.strategy, r.alpha)  # noqa: E731
    for a, b in zip(sorted(serial, key=key), sorted(pooled, key=key)):
        assert key(a) == key(b)
        assert a.J == b.J
        assert a.iterations == b.iterations


# ---------- failures ----------

def test_unconverged_cells_are_recorded_not_raised(small_config):
    config = replace(small_config, alphas=(1.0,), plots=False,
                     sweep=SweepConfig(tolerance=1e-9, max_iterations=2))
    records = run_matrix(config)
    by_strategy = {r.strategy: r for r in records}

    assert by_strategy[BASELINE].converged
    stalled = by_strategy["all_controls"]
    assert stalled.failed
    assert stalled.iterations == 2
    assert "did not converge" in stalled.error
    assert (config.output_dir / "trajectories" / "all_controls__alpha_1.csv").exists()

    summary = pd.read_csv(config.output_dir / "summary.csv")
    assert summary.set_index("strategy").loc["all_controls", "converged"] == False  # noqa: E712


def test_negative_state_becomes_a_failed_record(small_config):
    # a ten-day step overshoots S_H below zero
    config = replace(small_config, n_steps=2)
    record = SweepAgent().run(MatrixCell("spray", 1.0, config))
    assert record.failed
    assert record.J is None
    assert "went negative" in record.error
    assert not (config.output_dir / "trajectories" / "spray__alpha_1.csv").exists()


def test_invalid_cell_order_becomes_a_failed_record(small_config):
    record = SweepAgent().run(MatrixCell("spray", 1.5, small_config))
    assert record.failed
    assert record.iterations == 0
    assert "0 < alpha <= 1" in record.error


def test_unwritable_trajectory_becomes_a_failed_record(small_config, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory", encoding="utf-8")
    record = SweepAgent(output_dir=blocker).run(MatrixCell(BASELINE, 1.0, small_config))
    assert record.failed
    assert record.J is None
    assert record.iterations == 1
    assert "could not write trajectory" in record.error


# ---------- full matrix ----------

@pytest.mark.slow
def test_full_matrix_reproduces_the_qualitative_claims(tmp_path):
    records = run_matrix(ScenarioConfig(output_dir=tmp_path / "full", plots=False, report=False))
    assert len(records) == 32
    assert all(r.converged for r in records)

    baseline = {r.alpha: r for r in records if r.strategy == BASELINE}
    for r in records:
        base = baseline[r.alpha]
        assert r.final_I_H <= base.final_I_H + 1e-9, (r.strategy, r.alpha)
        assert r.final_I_V <= base.final_I_V + 1e-9, (r.strategy, r.alpha)
        assert r.J <= base.J + 1e-9, (r.strategy, r.alpha)

    at_one = [r for r in records if r.alpha == 1.0 and r.strategy != BASELINE]
    assert min(at_one, key=lambda r: r.J).strategy == "all_controls"
    assert np.isfinite([r.J for r in records]).all()
