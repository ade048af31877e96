"""
CSV tool
--------
Trajectory and summary tables for scenario runs. Every write goes to a temp
file in the target directory and is renamed into place, so concurrent cells
never leave half-written files behind.
"""

from pathlib import Path
from typing import Iterable, List, Sequence
import os
import tempfile

import numpy as np
import pandas as pd

from core.malaria import CONTROL_NAMES, COSTATE_NAMES, STATE_NAMES

TRAJECTORY_COLUMNS = ("t",) + STATE_NAMES + CONTROL_NAMES + COSTATE_NAMES
SUMMARY_COLUMNS = ("strategy", "alpha", "converged", "iterations", "J", "final_I_H", "final_I_V")
FLOAT_FORMAT = "%.12g"


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    return path


def atomic_write_bytes(path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    return path


def trajectory_frame(nodes, states, controls, costates) -> pd.DataFrame:
    table = np.column_stack([np.asarray(nodes), states, controls, costates])
    return pd.DataFrame(table, columns=list(TRAJECTORY_COLUMNS))


def write_trajectory_csv(path, nodes, states, controls, costates) -> Path:
    frame = trajectory_frame(nodes, states, controls, costates)
    return atomic_write_text(path, frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))


def write_table_csv(path, rows: Iterable[dict], columns: Sequence[str]) -> Path:
    frame = pd.DataFrame(list(rows), columns=list(columns))
    return atomic_write_text(path, frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))


def read_csv(path) -> pd.DataFrame:
    return pd.read_csv(path)


def missing_columns(frame: pd.DataFrame, columns: Sequence[str]) -> List[str]:
    return [c for c in columns if c not in frame.columns]
