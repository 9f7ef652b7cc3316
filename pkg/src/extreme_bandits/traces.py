"""Network-trace ingestion: per-host event counts in fixed time windows.

Two CSV layouts are accepted, one row per record:

* pre-binned counts, ``arm_id,count``
* raw events, ``arm_id,timestamp_seconds``, binned here into consecutive
  windows (4 s by default) starting at each arm's first event.

A header row is recognised when its second field is a known column name
(``count``, ``counts``, ``timestamp``, ``timestamp_seconds``, ``time``). With
no header, integer second fields mean counts and anything else means
timestamps.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .distributions import EmpiricalReplay

COUNT_HEADERS = {"count", "counts"}
EVENT_HEADERS = {"timestamp", "timestamp_seconds", "time", "time_seconds"}


class TraceFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class TraceDataset:
    labels: list[str]
    counts: list[np.ndarray]

    def __post_init__(self):
        if len(self.labels) != len(self.counts):
            raise ValueError("one label per arm is required")
        for label, c in zip(self.labels, self.counts):
            if len(c) == 0:
                raise ValueError(f"arm {label!r} has no counts")
            if np.any(np.asarray(c) < 0):
                raise ValueError(f"arm {label!r} has negative counts")

    @property
    def n_arms(self) -> int:
        return len(self.labels)

    def arms(self) -> list[EmpiricalReplay]:
        return [EmpiricalReplay(tuple(c), label) for label, c in zip(self.labels, self.counts)]

    def select(self, labels) -> "TraceDataset":
        index = {label: i for i, label in enumerate(self.labels)}
        missing = [label for label in labels if label not in index]
        if missing:
            raise KeyError(f"unknown trace arm(s): {missing}")
        return TraceDataset(list(labels), [self.counts[index[label]] for label in labels])


def bundled_trace_path() -> Path:
    """Path of the synthetic five-host trace shipped with the package."""
    return Path(str(resources.files("extreme_bandits") / "data" / "synthetic_trace.csv"))


def _is_int_text(text: str) -> bool:
    t = text.strip()
    if t.startswith(("+", "-")):
        t = t[1:]
    return t.isdigit()


def _parse_float(text: str, line: int, what: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise TraceFormatError(f"cannot parse {what} {text!r}", line) from None
    if not math.isfinite(v):
        raise TraceFormatError(f"{what} must be finite, got {text!r}", line)
    return v


def bin_events(timestamps, window: float = 4.0) -> np.ndarray:
    """Counts of events per consecutive window, starting at the first event."""
    if not window > 0:
        raise ValueError("window must be > 0")
    ts = np.asarray(timestamps, dtype=float)
    if ts.size == 0:
        raise ValueError("no events to bin")
    idx = np.floor((ts - ts.min()) / window).astype(np.int64)
    return np.bincount(idx)


def ingest_trace(path, schema: str = "auto", window: float = 4.0) -> TraceDataset:
    """Read a trace CSV into per-arm count series.

    ``schema`` is ``"counts"``, ``"events"`` or ``"auto"``. Raises
    :class:`TraceFormatError` (with the offending line number) on malformed
    rows, negative counts or empty arm ids.
    """
    if schema not in ("auto", "counts", "events"):
        raise ValueError(f"unknown trace schema {schema!r}")
    rows: list[tuple[int, str, str]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise TraceFormatError(f"expected 2 fields, got {len(row)}", line_no)
            rows.append((line_no, row[0].strip(), row[1].strip()))
    if rows and rows[0][2].lower() in COUNT_HEADERS | EVENT_HEADERS:
        _, _, name = rows.pop(0)
        if schema == "auto":
            schema = "counts" if name.lower() in COUNT_HEADERS else "events"
    if not rows:
        raise TraceFormatError("trace file has no data rows")
    if schema == "auto":
        schema = "counts" if all(_is_int_text(v) for _, _, v in rows) else "events"

    order: list[str] = []
    values: dict[str, list[float]] = {}
    for line_no, arm, text in rows:
        if not arm:
            raise TraceFormatError("empty arm id", line_no)
        if schema == "counts":
            v = _parse_float(text, line_no, "count")
            if v < 0:
                raise TraceFormatError(f"negative count {text!r}", line_no)
            if v != int(v):
                raise TraceFormatError(f"count must be an integer, got {text!r}", line_no)
        else:
            v = _parse_float(text, line_no, "timestamp")
        if arm not in values:
            order.append(arm)
            values[arm] = []
        values[arm].append(v)

    if schema == "counts":
        counts = [np.asarray(values[a], dtype=np.int64) for a in order]
    else:
        counts = [bin_events(values[a], window) for a in order]
    return TraceDataset(order, counts)


def write_counts_csv(dataset: TraceDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["arm_id", "count"])
        for label, c in zip(dataset.labels, dataset.counts):
            for v in c:
                w.writerow([label, int(v)])
