"""Trajectory CSV, summary JSON and sweep CSV readers/writers."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .analysis import RunSummary
from .sim import CSV_COLUMNS, Trajectory

__all__ = [
    "format_value",
    "write_trajectory_csv",
    "read_trajectory_csv",
    "write_summary_json",
    "read_summary_json",
    "write_sweep_csv",
    "MalformedTrajectoryError",
]

FLAG_COLUMNS = {"lemma_ok", "theorem_ok", "gate_open"}
INT_COLUMNS = {"step"} | FLAG_COLUMNS


class MalformedTrajectoryError(ValueError):
    pass


def format_value(v) -> str:
    """Render a number with 17 significant digits (lossless for doubles)."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return "%.17g" % float(v)


def _flag(v) -> str:
    v = int(v)
    return "na" if v < 0 else str(v)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        flag_idx = {i for i, c in enumerate(CSV_COLUMNS) if c in FLAG_COLUMNS}
        for row in traj.csv_rows():
            w.writerow([_flag(v) if i in flag_idx else format_value(v) for i, v in enumerate(row)])


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    """Load a trajectory CSV into column arrays; flags use -1 for ``na``."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise MalformedTrajectoryError(f"cannot read trajectory {path}: {exc}") from exc
    if not rows:
        raise MalformedTrajectoryError(f"{path}: empty file (header row missing)")
    header = rows[0]
    if tuple(header) != CSV_COLUMNS:
        raise MalformedTrajectoryError(f"{path}: unexpected header {header!r}")
    body = rows[1:]
    if not body:
        raise MalformedTrajectoryError(f"{path}: trajectory has no records")
    cols: dict[str, list] = {c: [] for c in CSV_COLUMNS}
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(CSV_COLUMNS):
            raise MalformedTrajectoryError(f"{path}:{lineno}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        for name, cell in zip(CSV_COLUMNS, row):
            try:
                if name in FLAG_COLUMNS:
                    cols[name].append(-1 if cell == "na" else int(cell))
                elif name == "step":
                    cols[name].append(int(cell))
                else:
                    cols[name].append(float(cell))
            except ValueError:
                raise MalformedTrajectoryError(f"{path}:{lineno}: bad value {cell!r} in column {name}") from None
    return {k: np.asarray(v, dtype=int if k in INT_COLUMNS else float) for k, v in cols.items()}


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, np.generic):
        return v.item()
    return v


def write_summary_json(summary: RunSummary, path) -> None:
    d = {k: _json_safe(v) for k, v in summary.to_dict().items()}
    Path(path).write_text(json.dumps(d, indent=2) + "\n")


def read_summary_json(path) -> RunSummary:
    return RunSummary.from_dict(json.loads(Path(path).read_text()))


def write_sweep_csv(path, param_names: Sequence[str], rows: Iterable[tuple[Sequence[Any], dict]]) -> None:
    """One row per run: parameter values, then summary fields in a fixed order."""
    rows = list(rows)
    summary_keys: list[str] = []
    for _, summ in rows:
        for k in summ:
            if k not in summary_keys:
                summary_keys.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run", *param_names, *summary_keys])
        for idx, (vals, summ) in enumerate(rows):
            w.writerow([idx, *(format_value(v) for v in vals),
                        *(format_value(summ.get(k)) for k in summary_keys)])
