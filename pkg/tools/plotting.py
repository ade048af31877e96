"""
Plot tool
---------
SVG line charts of trajectory CSVs. Output is deterministic: fixed SVG hash
salt and no date metadata, so reruns produce identical files.
"""

from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence
import io
import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from core.errors import ChannelError  # noqa: E402
from tools.csv_io import atomic_write_bytes, missing_columns, read_csv  # noqa: E402

logger = logging.getLogger(__name__)

SVG_METADATA = {"Date": None, "Creator": None}
CHANNEL_LABELS = {
    "S_H": "Susceptible humans",
    "I_H": "Infected humans",
    "R_H": "Partially immune humans",
    "S_V": "Susceptible mosquitoes",
    "I_V": "Infected mosquitoes",
    "u1": "u1 (treated bednets)",
    "u2": "u2 (treatment)",
    "u3": "u3 (insecticide spray)",
}


def _save_svg(fig, out_path) -> Path:
    buffer = io.BytesIO()
    with plt.rc_context({"svg.hashsalt": "malaria-ocp", "svg.fonttype": "none"}):
        fig.savefig(buffer, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    return atomic_write_bytes(out_path, buffer.getvalue())


def _validate_channels(channels: Sequence[str]):
    if not channels:
        raise ChannelError("at least one channel is required")


def emit_plot(csv_path, channels: Sequence[str], out_path, title: Optional[str] = None) -> Path:
    """One line per channel against time; raises ChannelError before writing anything."""
    channels = list(channels)
    _validate_channels(channels)
    frame = read_csv(csv_path)
    missing = missing_columns(frame, channels)
    if missing:
        raise ChannelError(f"channels {missing} are not in {csv_path}")

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for channel in channels:
        ax.plot(frame["t"], frame[channel], label=CHANNEL_LABELS.get(channel, channel))
    ax.set_xlabel("Time (days)")
    ax.set_ylabel("Value")
    ax.set_title(title or Path(csv_path).stem)
    ax.legend()
    ax.grid(alpha=0.3)

    logger.debug(f"[Plot] {Path(csv_path).name} -> {out_path}")
    return _save_svg(fig, out_path)


def emit_alpha_panels(csv_by_alpha: Mapping[float, str], channels: Sequence[str], out_path,
                      title: str, baseline_by_alpha: Optional[Mapping[float, str]] = None) -> Path:
    """
    One subplot per alpha (2 columns). Each subplot draws the requested channels;
    when baseline CSVs are given, the same channels without control are overlaid dashed.
    """
    channels = list(channels)
    _validate_channels(channels)
    alphas = sorted(csv_by_alpha, reverse=True)
    rows = (len(alphas) + 1) // 2
    cols = 1 if len(alphas) == 1 else 2
    fig, axes = plt.subplots(rows, cols, figsize=(6 * cols, 4 * rows), squeeze=False)

    for ax, alpha in zip(axes.flat, alphas):
        frame = read_csv(csv_by_alpha[alpha])
        missing = missing_columns(frame, channels)
        if missing:
            plt.close(fig)
            raise ChannelError(f"channels {missing} are not in {csv_by_alpha[alpha]}")
        for channel in channels:
            label = CHANNEL_LABELS.get(channel, channel)
            ax.plot(frame["t"], frame[channel], label=f"{label}, with control" if baseline_by_alpha else label)
        if baseline_by_alpha and alpha in baseline_by_alpha:
            base = read_csv(baseline_by_alpha[alpha])
            for channel in channels:
                ax.plot(base["t"], base[channel], linestyle="--",
                        label=f"{CHANNEL_LABELS.get(channel, channel)}, without control")
        ax.set_title(f"alpha = {alpha:g}")
        ax.set_xlabel("Time (days)")
        ax.set_ylabel("Value")
        ax.grid(alpha=0.3)
        ax.legend(fontsize="small")

    for ax in list(axes.flat)[len(alphas):]:
        ax.set_visible(False)

    fig.suptitle(title)
    fig.tight_layout()
    return _save_svg(fig, out_path)


def figure_plan(strategies: Sequence[str]) -> Dict[str, dict]:
    """
    Figure set for a batch: infected humans and infected mosquitoes per strategy,
    then the controls of the all-controls strategy one by one and together.
    """
    plan = {}
    for channel, noun in (("I_H", "infected humans"), ("I_V", "infected mosquitoes")):
        for strategy in strategies:
            plan[f"{channel}_{strategy}"] = {
                "strategy": strategy,
                "channels": [channel],
                "baseline": True,
                "title": f"{noun.capitalize()} with {strategy.replace('_', ' + ')}",
            }
    if "all_controls" in strategies:
        for channels in (["u1"], ["u2"], ["u3"], ["u1", "u2", "u3"]):
            plan["controls_" + "_".join(channels)] = {
                "strategy": "all_controls",
                "channels": channels,
                "baseline": False,
                "title": "Optimal control " + ", ".join(channels),
            }
    return plan
