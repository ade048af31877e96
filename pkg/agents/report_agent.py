"""
ReportAgent:
- writes summary.csv (one row per cell, baselines included)
- writes comparison.csv (each strategy against the no-control run at the same alpha)
- renders a short text report and its PDF version

The cross-alpha ordering is reported as data, not asserted.
"""

from pathlib import Path
from typing import Dict, List, Optional
import logging
import textwrap

from fpdf import FPDF

from core.malaria import BASELINE
from tools.csv_io import SUMMARY_COLUMNS, atomic_write_bytes, write_table_csv

logger = logging.getLogger(__name__)

COMPARISON_COLUMNS = (
    "strategy", "alpha", "J", "J_baseline", "J_reduction",
    "final_I_H_reduction", "final_I_V_reduction",
)


def _reduction(base: Optional[float], value: Optional[float]) -> Optional[float]:
    if base is None or value is None:
        return None
    return base - value


def comparison_rows(records) -> List[dict]:
    baselines = {r.alpha: r for r in records if r.strategy == BASELINE and r.J is not None}
    rows = []
    for r in records:
        if r.strategy == BASELINE:
            continue
        base = baselines.get(r.alpha)
        rows.append({
            "strategy": r.strategy,
            "alpha": r.alpha,
            "J": r.J,
            "J_baseline": base.J if base else None,
            "J_reduction": _reduction(base.J if base else None, r.J),
            "final_I_H_reduction": _reduction(base.final_I_H if base else None, r.final_I_H),
            "final_I_V_reduction": _reduction(base.final_I_V if base else None, r.final_I_V),
        })
    return rows


def best_strategy_per_alpha(records) -> Dict[float, str]:
    best = {}
    for r in records:
        if r.strategy == BASELINE or r.J is None or not r.converged:
            continue
        current = best.get(r.alpha)
        if current is None or r.J < current.J:
            best[r.alpha] = r
    return {alpha: r.strategy for alpha, r in best.items()}


def _fmt(value, spec=".6g"):
    return "-" if value is None else format(value, spec)


def _report_text(title, records, comparisons, best) -> str:
    lines = [title, "=" * len(title)]

    failed = [r for r in records if r.failed]
    lines.append(f"\nCells: {len(records)} ({len(failed)} failed)")
    for r in failed:
        lines.append(f"  - {r.strategy} alpha={r.alpha:g}: {r.error}")

    lines.append("\nBest strategy per alpha (lowest J):")
    for alpha in sorted(best, reverse=True):
        lines.append(f"  - alpha={alpha:g}: {best[alpha]}")

    lines.append("\nReduction against no control (J, final I_H, final I_V):")
    for row in comparisons:
        lines.append(
            f"  - {row['strategy']} alpha={row['alpha']:g}: "
            f"{_fmt(row['J_reduction'])}, {_fmt(row['final_I_H_reduction'])}, {_fmt(row['final_I_V_reduction'])}"
        )

    by_alpha = {}
    for row in comparisons:
        if row["strategy"] == "all_controls" and row["final_I_H_reduction"] is not None:
            by_alpha[row["alpha"]] = row["final_I_H_reduction"]
    if by_alpha:
        order = sorted(by_alpha, key=by_alpha.get, reverse=True)
        lines.append("\nAll-controls final I_H reduction, largest first: "
                     + ", ".join(f"alpha={a:g}" for a in order))

    return "\n".join(textwrap.fill(line, 100, subsequent_indent="    ") for line in lines)


def _report_pdf(title: str, records) -> bytes:
    pdf = FPDF()
    pdf.set_auto_page_break(True, margin=15)
    pdf.add_page()
    pdf.set_font("Helvetica", "B", 14)
    pdf.cell(0, 10, title, 0, 1)

    widths = (44, 16, 20, 18, 34, 28, 28)
    pdf.set_font("Helvetica", "B", 8)
    for width, name in zip(widths, SUMMARY_COLUMNS):
        pdf.cell(width, 6, name, 1, 0)
    pdf.ln()

    pdf.set_font("Helvetica", "", 8)
    for r in records:
        values = (r.strategy, f"{r.alpha:g}", str(r.converged), str(r.iterations),
                  _fmt(r.J, ".8g"), _fmt(r.final_I_H, ".6g"), _fmt(r.final_I_V, ".6g"))
        for width, value in zip(widths, values):
            pdf.cell(width, 6, value, 1, 0)
        pdf.ln()

    return bytes(pdf.output())


class ReportAgent:
    def __init__(self, title: str = "Malaria optimal control matrix", pdf: bool = True):
        self.title = title
        self.pdf = pdf

    def run(self, records, output_dir) -> Dict[str, object]:
        output_dir = Path(output_dir)
        records = sorted(records, key=lambda r: (r.strategy, -r.alpha))

        summary_path = write_table_csv(output_dir / "summary.csv",
                                       (r.summary_row() for r in records), SUMMARY_COLUMNS)
        comparisons = comparison_rows(records)
        comparison_path = write_table_csv(output_dir / "comparison.csv", comparisons, COMPARISON_COLUMNS)
        best = best_strategy_per_alpha(records)
        report_text = _report_text(self.title, records, comparisons, best)

        out = {
            "summary": str(summary_path),
            "comparison": str(comparison_path),
            "report_text": report_text,
            "best_strategy": best,
        }
        if self.pdf:
            out["report_pdf"] = str(atomic_write_bytes(output_dir / "report.pdf", _report_pdf(self.title, records)))

        logger.info(f"[ReportAgent] summary written to {summary_path}")
        return out
