"""Metrics from measurement logs.

Readings are reduced to one data point per (cycle, phase, strain) group,
normalised by that cycle's own baseline, and turned into

* degree of hysteresis ``(A_stretch - A_release) / A_stretch * 100`` with
  trapezoidal areas over strain expressed as a fraction,
* gauge factor and R^2 of a least-squares line through the five-cycle mean
  curve,
* stretchability (last strain with a valid reading in a failure run),
* zero-value repeatability statistics across sensors.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateCurve, FitError, InsufficientData, MissingBaseline, NotAFailureRun
from .measurement import MeasurementLog

DISPLAY_UNITS = {"Ω": ("kΩ", 1e-3), "F": ("pF", 1e12)}


@dataclass
class CycleCurve:
    cycle_index: int
    baseline_value: float
    stretch_points: np.ndarray  # (n, 2): strain_pct, relative change; ascending strain
    release_points: np.ndarray  # (m, 2): in recorded order

    def to_dict(self) -> dict:
        return {
            "cycle_index": self.cycle_index,
            "baseline_value": self.baseline_value,
            "stretch_points": self.stretch_points.tolist(),
            "release_points": self.release_points.tolist(),
        }


@dataclass
class ZeroValueStats:
    unit: str
    n: int
    mean: float
    sample_std: float
    relative_std_pct: float
    sensors: list[str] = field(default_factory=list)
    values: list[float] = field(default_factory=list)


@dataclass
class CharacterizationReport:
    sensor_ids: list[str]
    unit: str | None = None
    dh_pct_per_cycle: list[float] = field(default_factory=list)
    dh_pct_mean: float | None = None
    gauge_factor: float | None = None
    intercept: float | None = None
    r_squared: float | None = None
    fit_phases: str | None = None
    stretchability_pct: float | None = None
    zero_value_stats: list[ZeroValueStats] = field(default_factory=list)
    curves: list[CycleCurve] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k not in ("curves", "zero_value_stats")}
        out["zero_value_stats"] = [asdict(z) for z in self.zero_value_stats]
        out["curves"] = [c.to_dict() for c in self.curves]
        return out


def _exact_mean(values: np.ndarray) -> float:
    means, _ = kernels.group_means(np.zeros(values.shape[0], dtype=np.int64), values, 1)
    return float(means[0])


def _single_sensor(log: MeasurementLog, sensor_id: str | None) -> MeasurementLog:
    if sensor_id is not None:
        return log.select(log.sensor_id == sensor_id)
    sensors = log.sensors
    if len(sensors) > 1:
        raise ValueError(f"log holds several sensors {sensors}; pass sensor_id")
    return log


def build_curves(log: MeasurementLog, sensor_id: str | None = None) -> list[CycleCurve]:
    """Per-cycle relative-change curves from stretch/release rows."""
    log = _single_sensor(log, sensor_id)
    sweep = (log.phase == "stretch") | (log.phase == "release")
    if not np.any(sweep):
        return []
    cycles = np.unique(log.cycle[sweep])

    baseline_mask = log.phase == "baseline"
    baselines = {}
    for c in cycles.tolist():
        rows = log.reading_value[baseline_mask & (log.cycle == c)]
        if rows.size == 0:
            raise MissingBaseline(c)
        baselines[c] = _exact_mean(rows)

    sub = log.select(sweep)
    keys = np.rec.fromarrays([sub.cycle, sub.phase == "release", sub.strain_pct])
    uniq, first_idx, codes = np.unique(keys, return_index=True, return_inverse=True)
    means, _ = kernels.group_means(codes.ravel(), sub.reading_value, uniq.shape[0])

    curves = []
    for c in cycles.tolist():
        base = baselines[c]
        parts = {}
        for is_release in (False, True):
            sel = np.flatnonzero((uniq.f0 == c) & (uniq.f1 == is_release))
            # order by first appearance, i.e. the recorded schedule
            sel = sel[np.argsort(first_idx[sel], kind="stable")]
            strain = uniq.f2[sel].astype(float)
            rel = (means[sel] - base) / base
            parts[is_release] = np.column_stack([strain, rel]) if sel.size else np.zeros((0, 2))
        stretch = parts[False]
        stretch = stretch[np.argsort(stretch[:, 0], kind="stable")]
        curves.append(CycleCurve(int(c), base, stretch, parts[True]))
    return curves


def degree_of_hysteresis(curve: CycleCurve) -> float:
    """Degree of hysteresis of one cycle in percent.

    The release branch shares the cycle's turning point with the stretch
    branch; when the release data start below the peak, the stretch point
    at the peak closes the loop.
    """
    st = curve.stretch_points
    if st.shape[0] < 2 or np.ptp(st[:, 0]) == 0:
        raise DegenerateCurve("need at least two stretch points spanning nonzero strain")
    rl = curve.release_points
    if rl.shape[0] == 0:
        raise DegenerateCurve("no release points")
    rl = rl[np.argsort(rl[:, 0], kind="stable")]
    lo, hi = st[0], st[-1]
    if rl[-1, 0] < hi[0]:
        rl = np.vstack([rl, hi])
    if rl[0, 0] > lo[0]:
        rl = np.vstack([lo, rl])
    a_stretch = kernels.trapezoid(st[:, 0] / 100.0, st[:, 1])
    if not a_stretch > 0:
        raise DegenerateCurve(f"stretch area {a_stretch:g} is not positive")
    a_release = kernels.trapezoid(rl[:, 0] / 100.0, rl[:, 1])
    return (a_stretch - a_release) / a_stretch * 100.0


def mean_curve(curves: list[CycleCurve], phase: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Across-cycle mean and sample std of the relative change at each strain level."""
    attr = "stretch_points" if phase == "stretch" else "release_points"
    buckets: dict[float, list[float]] = {}
    for curve in curves:
        for s, rel in getattr(curve, attr):
            buckets.setdefault(float(s), []).append(float(rel))
    strains = np.array(sorted(buckets), dtype=float)
    if phase != "stretch":
        strains = strains[::-1]
    means = np.array([math.fsum(buckets[s]) / len(buckets[s]) for s in strains])
    stds = np.array([np.std(buckets[s], ddof=1) if len(buckets[s]) > 1 else 0.0 for s in strains])
    return strains, means, stds


def fit_points(strain_fraction, relative_change) -> tuple[float, float, float]:
    """Least-squares line; returns ``(gauge_factor, intercept, r_squared)``."""
    x = np.asarray(strain_fraction, dtype=float)
    y = np.asarray(relative_change, dtype=float)
    if x.shape[0] < 2 or np.unique(x).shape[0] < 2:
        raise FitError("need at least two distinct strain levels")
    return kernels.linear_fit(x, y)


def _fit_curves(curves: list[CycleCurve], stretch_only: bool) -> tuple[float, float, float, str]:
    phases = ("stretch",) if stretch_only else ("stretch", "release")
    xs, ys = [], []
    for phase in phases:
        strain, mean, _ = mean_curve(curves, phase)
        xs.append(strain / 100.0)
        ys.append(mean)
    gf, intercept, r2 = fit_points(np.concatenate(xs), np.concatenate(ys))
    return gf, intercept, r2, "+".join(phases)


def fit_linear(curves: list[CycleCurve], stretch_only: bool = False) -> tuple[float, float]:
    """Gauge factor and R^2 of a line through the per-level cycle means.

    Stretch and release means enter as separate points unless
    ``stretch_only`` is set.
    """
    gf, _, r2, _ = _fit_curves(curves, stretch_only)
    return gf, r2


def stretchability(log: MeasurementLog) -> float:
    """Strain (percent) of the last valid reading before the open circuit."""
    failure = log.phase == "failure_run"
    broken = failure & ~np.isfinite(log.reading_value)
    if not np.any(broken):
        raise NotAFailureRun("log has no failure row")
    t_fail = log.timestamp_s[broken].min()
    valid = (
        ((log.phase == "failure_run") | (log.phase == "baseline"))
        & np.isfinite(log.reading_value)
        & (log.timestamp_s < t_fail)
    )
    if not np.any(valid):
        return 0.0
    last = np.argmax(np.where(valid, log.timestamp_s, -np.inf))
    return float(log.strain_pct[last])


def repeatability_stats(zero_values) -> tuple[float, float, float]:
    """Mean, sample standard deviation (n - 1) and relative std in percent."""
    values = [float(v) for v in zero_values]
    n = len(values)
    if n < 2:
        raise InsufficientData("need at least two zero values")
    mean = math.fsum(values) / n
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1))
    return mean, std, 100.0 * std / mean


def zero_values(log: MeasurementLog) -> dict[str, list[tuple[str, float]]]:
    """Zero value of each sensor, from its first baseline block, grouped by unit."""
    out: dict[str, list[tuple[str, float]]] = {}
    base = log.select(log.phase == "baseline")
    for sid in base.sensors:
        rows = base.select(base.sensor_id == sid)
        first_cycle = rows.cycle.min()
        block = rows.reading_value[rows.cycle == first_cycle]
        out.setdefault(str(rows.reading_unit[0]), []).append((sid, _exact_mean(block)))
    return out


def characterize(log: MeasurementLog, stretch_only: bool = False) -> CharacterizationReport:
    """Every metric the log supports."""
    report = CharacterizationReport(sensor_ids=log.sensors)
    units = list(dict.fromkeys(log.reading_unit.tolist()))
    report.unit = units[0] if len(units) == 1 else None

    sweep = (log.phase == "stretch") | (log.phase == "release")
    if np.any(sweep):
        curves = build_curves(log)
        report.curves = curves
        with_release = [c for c in curves if c.release_points.shape[0]]
        if with_release:
            report.dh_pct_per_cycle = [degree_of_hysteresis(c) for c in with_release]
            report.dh_pct_mean = math.fsum(report.dh_pct_per_cycle) / len(report.dh_pct_per_cycle)
        gf, b, r2, phases = _fit_curves(curves, stretch_only or not with_release)
        report.gauge_factor, report.intercept, report.r_squared, report.fit_phases = gf, b, r2, phases

    if np.any(log.phase == "failure_run"):
        report.stretchability_pct = stretchability(log)

    per_unit = zero_values(log)
    for unit, items in per_unit.items():
        if len(items) >= 2:
            sids, vals = zip(*items)
        elif len(items) == 1 and np.any(sweep):
            # single sensor: spread of its per-cycle baselines
            sids = [items[0][0]]
            vals = tuple(c.baseline_value for c in report.curves)
            if len(vals) < 2:
                continue
        else:
            continue
        mean, std, rel = repeatability_stats(vals)
        report.zero_value_stats.append(ZeroValueStats(unit, len(vals), mean, std, rel, list(sids), list(vals)))
    return report
