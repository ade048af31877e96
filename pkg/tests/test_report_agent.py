import pandas as pd

from agents.report_agent import COMPARISON_COLUMNS, ReportAgent, best_strategy_per_alpha, comparison_rows
from agents.sweep_agent import RunRecord


def record(strategy, alpha, J, I_H=10.0, I_V=20.0, converged=True, error=None):
    return RunRecord(strategy, alpha, converged, 5, J, I_H, I_V, error=error)


RECORDS = [
    record("no_controls", 1.0, 1000.0, 50.0, 80.0),
    record("spray", 1.0, 700.0, 40.0, 30.0),
    record("all_controls", 1.0, 400.0, 20.0, 10.0),
    record("no_controls", 0.9, 900.0, 45.0, 70.0),
    record("all_controls", 0.9, 300.0, 10.0, 5.0),
    record("treatment", 0.9, None, None, None, converged=False, error="went negative"),
]


def test_comparison_against_the_same_alpha():
    rows = {(r["strategy"], r["alpha"]): r for r in comparison_rows(RECORDS)}
    assert ("no_controls", 1.0) not in rows
    assert rows[("spray", 1.0)]["J_reduction"] == 300.0
    assert rows[("all_controls", 0.9)]["J_baseline"] == 900.0
    assert rows[("all_controls", 0.9)]["final_I_V_reduction"] == 65.0
    assert rows[("treatment", 0.9)]["J_reduction"] is None


def test_best_strategy_skips_failed_cells():
    assert best_strategy_per_alpha(RECORDS) == {1.0: "all_controls", 0.9: "all_controls"}


def test_report_files(tmp_path):
    out = ReportAgent().run(RECORDS, tmp_path)

    summary = pd.read_csv(out["summary"])
    assert list(summary.columns) == ["strategy", "alpha", "converged", "iterations", "J", "final_I_H", "final_I_V"]
    assert len(summary) == len(RECORDS)
    assert list(pd.read_csv(out["comparison"]).columns) == list(COMPARISON_COLUMNS)
    assert open(out["report_pdf"], "rb").read(4) == b"%PDF"

    text = out["report_text"]
    assert "6 (1 failed)" in text
    assert "treatment alpha=0.9: went negative" in text
    assert "largest first: alpha=0.9, alpha=1" in text


def test_pdf_can_be_skipped(tmp_path):
    out = ReportAgent(pdf=False).run(RECORDS[:2], tmp_path)
    assert "report_pdf" not in out
    assert not (tmp_path / "report.pdf").exists()
