"""Experiment logs: deterministic CSV rows plus a separate metadata file.

The CSV must be byte-identical across reruns of the same config and seed,
so anything wall-clock dependent (timestamps, per-step timings) lives in
`<name>_meta.json` instead of the table.
"""

from __future__ import annotations

import csv
import json
import pathlib
import time


def _format(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


class ExperimentLog:
    """Append-only table with strictly increasing step indices."""

    def __init__(self, columns, meta=None):
        self.columns = list(columns)
        if self.columns[0] != "t":
            raise ValueError("first column must be the step index 't'")
        self.rows = []
        self.meta = dict(meta or {})
        self.wall_times = []
        self._t0 = time.perf_counter()

    def append(self, **values):
        t = values.get("t")
        if self.rows and t <= self.rows[-1][0]:
            raise ValueError(f"step index must increase (got {t} after {self.rows[-1][0]})")
        unknown = set(values) - set(self.columns)
        if unknown:
            raise ValueError(f"unknown log columns: {sorted(unknown)}")
        self.rows.append(tuple(values.get(c) for c in self.columns))
        self.wall_times.append(time.perf_counter() - self._t0)

    def column(self, name):
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def save(self, path):
        path = pathlib.Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([_format(v) for v in row])
        meta = dict(self.meta)
        meta["wall_times"] = self.wall_times
        meta["written_at"] = time.time()
        with open(path.with_name(path.stem + "_meta.json"), "w") as fh:
            json.dump(meta, fh, indent=2)
        return path


def load_log(path):
    """(columns, rows) with numeric fields parsed back where possible."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = []
        for raw in reader:
            parsed = []
            for cell in raw:
                if cell == "":
                    parsed.append(None)
                    continue
                try:
                    parsed.append(int(cell))
                except ValueError:
                    try:
                        parsed.append(float(cell))
                    except ValueError:
                        parsed.append(cell)
            rows.append(parsed)
    return columns, rows


def log_column(path, name):
    columns, rows = load_log(path)
    i = columns.index(name)
    return [row[i] for row in rows]


def steps_to_reach(values, threshold):
    """First 0-based index whose value is >= threshold, or None."""
    for i, v in enumerate(values):
        if v is not None and v >= threshold:
            return i
    return None
