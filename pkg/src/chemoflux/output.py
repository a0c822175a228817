"""Bit-stable data-file emission: .dat time series, snapshot CSVs, manifest.

Every writer is deterministic — fixed iteration order, shortest round-trip
float text, LF newlines, no timestamps — so identical configurations leave
byte-identical files behind, which regression tests compare directly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .solver import TerminationStatus

__all__ = [
    "format_number",
    "write_timeseries_dat",
    "write_snapshot_csv",
    "OutputManifest",
    "write_manifest",
]


def format_number(x: float) -> str:
    """Shortest text that round-trips the double; integral values bare."""
    value = float(x)
    if value != value:
        return "NaN"
    text = repr(value)
    return text[:-2] if text.endswith(".0") else text


def write_timeseries_dat(series: Sequence[tuple], path: str) -> None:
    """Write `t value` rows under the two-column header line `a b`."""
    rows = list(series)
    if not rows:
        raise ValueError("refusing to write an empty time series")
    lines = ["a b"]
    for t, value in rows:
        lines.append(f"{format_number(t)} {format_number(value)}")
    _write_text(path, "\n".join(lines) + "\n")


def write_snapshot_csv(array: np.ndarray, path: str,
                       x_min: float, x_max: float,
                       y_min: float, y_max: float) -> None:
    """Write a square Cartesian sample row-major, NaN outside the domain."""
    grid = np.asarray(array, dtype=float)
    if grid.ndim != 2 or grid.shape[0] != grid.shape[1]:
        raise ValueError(f"snapshot must be a square 2-d array, got {grid.shape}")
    resolution = grid.shape[0]
    header = (f"# {format_number(x_min)} {format_number(x_max)} "
              f"{format_number(y_min)} {format_number(y_max)} {resolution}")
    lines = [header]
    for row in grid:
        lines.append(",".join(format_number(v) for v in row))
    _write_text(path, "\n".join(lines) + "\n")


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


@dataclass(frozen=True)
class OutputManifest:
    """What a command produced: content-addressed id, files, config, status."""

    run_id: str
    paths: tuple
    config_echo: str
    status: Mapping[str, object]

    def to_json(self) -> str:
        payload = {
            "run_id": self.run_id,
            "paths": list(self.paths),
            "config_echo": self.config_echo,
            "status": dict(self.status),
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def status_summary(status: TerminationStatus) -> dict[str, object]:
    summary: dict[str, object] = {
        "kind": status.kind,
        "t_final": status.t_final,
        "reason": status.reason,
    }
    if status.estimated_blowup_time is not None:
        summary["estimated_blowup_time"] = status.estimated_blowup_time
    return summary


def write_manifest(manifest: OutputManifest, out_dir: str,
                   name: str = "manifest.json") -> str:
    path = os.path.join(out_dir, name)
    _write_text(path, manifest.to_json())
    return path


def relative_paths(out_dir: str, names: Iterable[str]) -> tuple:
    """Manifest paths are relative to the output directory, sorted."""
    missing = [n for n in names if not os.path.exists(os.path.join(out_dir, n))]
    if missing:
        raise FileNotFoundError(f"manifest lists files that were not written: {missing}")
    return tuple(sorted(names))
