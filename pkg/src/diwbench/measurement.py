"""Instrument logs: the in-memory table and its CSV form.

The CSV layout is the ingestion contract for both virtual and real-bench
data::

    timestamp_s,cycle,phase,strain_pct,reading_value,reading_unit,sensor_id

Floats carry at most nine significant digits; an open circuit after
mechanical failure is written as ``inf``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SchemaError

COLUMNS = ("timestamp_s", "cycle", "phase", "strain_pct", "reading_value", "reading_unit", "sensor_id")
HEADER = ",".join(COLUMNS)
PHASES = ("baseline", "stretch", "release", "failure_run")
UNITS = ("F", "Ω")


def format_float(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = format(value, ".9g")
    return "0" if text == "-0" else text


@dataclass
class MeasurementLog:
    timestamp_s: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cycle: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    phase: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype="<U11"))
    strain_pct: np.ndarray = field(default_factory=lambda: np.zeros(0))
    reading_value: np.ndarray = field(default_factory=lambda: np.zeros(0))
    reading_unit: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype="<U2"))
    sensor_id: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype="<U64"))

    def __len__(self) -> int:
        return int(self.timestamp_s.shape[0])

    def select(self, mask) -> "MeasurementLog":
        return MeasurementLog(*(getattr(self, c)[mask] for c in COLUMNS))

    def rows(self):
        for i in range(len(self)):
            yield tuple(getattr(self, c)[i] for c in COLUMNS)

    @property
    def sensors(self) -> list[str]:
        return list(dict.fromkeys(self.sensor_id.tolist()))

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(HEADER + "\n")
        for t, c, ph, s, v, u, sid in self.rows():
            buf.write(f"{format_float(t)},{int(c)},{ph},{format_float(s)},{format_float(v)},{u},{sid}\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv_text(), encoding="utf-8")

    @classmethod
    def concat(cls, logs: list["MeasurementLog"]) -> "MeasurementLog":
        if not logs:
            return cls()
        return cls(*(np.concatenate([getattr(log, c) for log in logs]) for c in COLUMNS))


class LogBuilder:
    """Collects sample blocks on one monotone timeline."""

    def __init__(self, sample_rate_hz: float, t0: float = 0.0):
        self.rate = sample_rate_hz
        self.t = t0
        self._blocks: list[tuple] = []

    def block(self, cycle: int, phase: str, strain_pct: float, values, unit: str, sensor_id: str, duration_s: float | None = None):
        values = np.atleast_1d(np.asarray(values, dtype=float))
        n = values.shape[0]
        times = np.round(self.t + np.arange(n) / self.rate, 9)
        self._blocks.append((times, cycle, phase, strain_pct, values, unit, sensor_id))
        self.t += duration_s if duration_s is not None else n / self.rate

    def idle(self, seconds: float) -> None:
        self.t += seconds

    def build(self) -> MeasurementLog:
        if not self._blocks:
            return MeasurementLog()
        cols = {c: [] for c in COLUMNS}
        for times, cycle, phase, strain, values, unit, sid in self._blocks:
            n = times.shape[0]
            cols["timestamp_s"].append(times)
            cols["cycle"].append(np.full(n, cycle, dtype=np.int64))
            cols["phase"].append(np.full(n, phase, dtype="<U11"))
            cols["strain_pct"].append(np.full(n, float(strain)))
            cols["reading_value"].append(values)
            cols["reading_unit"].append(np.full(n, unit, dtype="<U2"))
            cols["sensor_id"].append(np.full(n, sid, dtype="<U64"))
        return MeasurementLog(*(np.concatenate(cols[c]) for c in COLUMNS))


def parse_csv(text: str) -> MeasurementLog:
    """Parse and schema-check CSV text; errors name the offending file line."""
    lines = text.lstrip("\ufeff").splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise SchemaError(1, f"header must be {HEADER!r}")
    cols: dict[str, list] = {c: [] for c in COLUMNS}
    last_t = -math.inf
    for lineno, fields in enumerate(csv.reader(lines[1:]), start=2):
        if not fields:
            continue
        if len(fields) != len(COLUMNS):
            raise SchemaError(lineno, f"expected {len(COLUMNS)} fields, got {len(fields)}")
        t_s, c_s, phase, s_s, v_s, unit, sid = fields
        try:
            t = float(t_s)
            cycle = int(c_s)
            strain = float(s_s)
            value = float(v_s)
        except ValueError as exc:
            raise SchemaError(lineno, f"unparseable number ({exc})") from None
        if not math.isfinite(t) or not math.isfinite(strain):
            raise SchemaError(lineno, "timestamp and strain must be finite")
        if t <= last_t:
            raise SchemaError(lineno, "timestamps must be strictly increasing")
        if phase not in PHASES:
            raise SchemaError(lineno, f"unknown phase {phase!r}")
        if unit not in UNITS:
            raise SchemaError(lineno, f"unknown unit {unit!r}")
        if not sid:
            raise SchemaError(lineno, "empty sensor_id")
        if math.isnan(value) or (math.isinf(value) and phase != "failure_run"):
            raise SchemaError(lineno, "non-finite reading outside a failure run")
        last_t = t
        for key, val in zip(COLUMNS, (t, cycle, phase, strain, value, unit, sid)):
            cols[key].append(val)
    return MeasurementLog(
        np.asarray(cols["timestamp_s"], dtype=float),
        np.asarray(cols["cycle"], dtype=np.int64),
        np.asarray(cols["phase"], dtype="<U11"),
        np.asarray(cols["strain_pct"], dtype=float),
        np.asarray(cols["reading_value"], dtype=float),
        np.asarray(cols["reading_unit"], dtype="<U2"),
        np.asarray(cols["sensor_id"], dtype="<U64"),
    )


def read_csv(path) -> MeasurementLog:
    return parse_csv(Path(path).read_text(encoding="utf-8"))
