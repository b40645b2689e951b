"""Sampled simulation record and its CSV form."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# One column per field, in this order, in every CSV export.
FIELDS = (
    "t", "omega", "omega_ref", "theta", "theta_ref",
    "isd", "isq", "isd_ref", "isq_ref", "psird", "psirq",
    "vsd", "vsq", "Te", "TL", "S_outer", "Sd", "Sq",
)

FLOAT_FORMAT = "{:.9g}"


class TraceIOError(OSError):
    """Reading or writing a trace file failed."""


@dataclass
class Trace:
    """Controller-rate samples of every logged signal.

    ``data`` maps each name in :data:`FIELDS` to a 1-D array. ``meta`` holds
    run context that is not a per-sample signal (mode, control period,
    target edges, controller-constant fingerprints).
    """

    data: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        missing = set(FIELDS) - set(self.data)
        if missing:
            raise ValueError(f"trace is missing fields {sorted(missing)}")
        lengths = {len(v) for v in self.data.values()}
        if len(lengths) > 1:
            raise ValueError("trace columns have different lengths")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[name]

    def __len__(self) -> int:
        return len(self.data["t"])

    @classmethod
    def from_rows(cls, rows: list[tuple], meta: dict | None = None) -> "Trace":
        arr = np.array(rows, dtype=float).reshape(len(rows), len(FIELDS))
        return cls({name: arr[:, i].copy() for i, name in enumerate(FIELDS)}, meta or {})

    def head(self, n: int) -> "Trace":
        return Trace({k: v[:n].copy() for k, v in self.data.items()}, dict(self.meta))


def export_csv(tr: Trace, path: str | Path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(FIELDS)
            columns = [tr.data[name] for name in FIELDS]
            for i in range(len(tr)):
                writer.writerow([FLOAT_FORMAT.format(col[i]) for col in columns])
    except OSError as exc:
        raise TraceIOError(f"cannot write trace CSV {path}: {exc}") from exc
    return path


def read_csv(path: str | Path) -> Trace:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [tuple(float(x) for x in row) for row in reader]
    except (OSError, StopIteration) as exc:
        raise TraceIOError(f"cannot read trace CSV {path}: {exc}") from exc
    if tuple(header) != FIELDS:
        raise TraceIOError(f"{path}: unexpected header {header}")
    return Trace.from_rows(rows)
