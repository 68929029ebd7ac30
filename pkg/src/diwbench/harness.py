"""Virtual bench: motorised rail, sensor under test and LCR meter.

Protocols mirror the static-strain procedure: move the rail to a strain
level, hold, record a fixed number of meter samples, move on. Each cycle of
the cyclic test starts with a fresh unstrained baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import ProtocolError
from .measurement import LogBuilder, MeasurementLog
from .sensor import SensorSpec, response_release, response_stretch, zero_value


@dataclass(frozen=True)
class ProtocolConfig:
    max_strain_pct: float = 300.0
    cycles: int = 5
    strain_step_pct: float = 25.0
    hold_s: float = 3.0
    samples_per_point: int = 10
    sample_rate_hz: float = 10.0
    baseline_samples: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if self.cycles < 1:
            raise ProtocolError("cycles must be >= 1")
        if not (self.max_strain_pct > 0 and self.strain_step_pct > 0):
            raise ProtocolError("strain limits must be > 0")
        if not (self.sample_rate_hz > 0 and self.hold_s > 0):
            raise ProtocolError("sample rate and hold time must be > 0")
        if self.samples_per_point < 1 or self.baseline_samples < 1:
            raise ProtocolError("sample counts must be >= 1")
        if self.samples_per_point / self.sample_rate_hz > self.hold_s + 1e-12:
            raise ProtocolError("samples do not fit in the hold time")
        steps = self.max_strain_pct / self.strain_step_pct
        if abs(steps - round(steps)) > 1e-9:
            raise ProtocolError("strain step must divide the maximum strain")

    def strain_levels(self) -> np.ndarray:
        n = int(round(self.max_strain_pct / self.strain_step_pct))
        return np.round(np.arange(n + 1) * self.strain_step_pct, 9)


class VirtualRail:
    """Clamp-to-clamp stretcher; strain is engineering strain of the free length."""

    def __init__(self, gauge_length_mm: float):
        self.gauge_length_mm = gauge_length_mm
        self.strain_pct = 0.0

    @property
    def position_mm(self) -> float:
        return self.gauge_length_mm * self.strain_pct / 100.0

    def move_to(self, strain_pct: float) -> None:
        if strain_pct < 0:
            raise ProtocolError("the rail cannot compress the sensor")
        self.strain_pct = float(strain_pct)


class VirtualSensor:
    """Tracks loading direction so readings follow the right hysteresis branch."""

    def __init__(self, spec: SensorSpec):
        self.spec = spec
        self.zero = zero_value(spec)
        self.strain_pct = 0.0
        self.peak_pct = 0.0
        self.unloading = False
        self.broken = False

    def strain_to(self, strain_pct: float) -> None:
        if strain_pct > self.spec.materials.failure_strain_pct:
            self.broken = True
        if strain_pct < self.strain_pct:
            self.unloading = True
        elif strain_pct > self.strain_pct:
            if self.unloading:
                # reloading starts a new cycle on the loading branch
                self.unloading = False
                self.peak_pct = 0.0
            self.peak_pct = max(self.peak_pct, strain_pct)
        if strain_pct == 0.0:
            self.unloading = False
            self.peak_pct = 0.0
        self.strain_pct = strain_pct

    def true_value(self) -> float:
        if self.broken:
            return math.inf
        s = self.strain_pct
        if self.unloading and self.peak_pct > 0:
            rel = response_release(self.spec, s, self.peak_pct)
        else:
            rel = response_stretch(self.spec, s)
        return self.zero * (1.0 + rel)


class VirtualLCRMeter:
    """Reads the sensor with additive Gaussian noise proportional to its zero value."""

    def __init__(self, sensor: VirtualSensor, rng: np.random.Generator):
        self.sensor = sensor
        self.rng = rng
        self.sigma = sensor.spec.materials.noise_std_rel * sensor.zero

    def sample(self, n: int) -> np.ndarray:
        value = self.sensor.true_value()
        if math.isinf(value):
            return np.full(n, math.inf)
        if self.sigma == 0.0:
            return np.full(n, value)
        return value + self.rng.normal(0.0, self.sigma, n)


class Bench:
    def __init__(self, spec: SensorSpec, rng: np.random.Generator):
        self.spec = spec
        self.rail = VirtualRail(spec.gauge_length_mm)
        self.sensor = VirtualSensor(spec)
        self.meter = VirtualLCRMeter(self.sensor, rng)

    def set_strain(self, strain_pct: float) -> None:
        self.rail.move_to(strain_pct)
        self.sensor.strain_to(self.rail.strain_pct)


def run_cyclic(spec: SensorSpec, cfg: ProtocolConfig | None = None) -> MeasurementLog:
    """Stretch-and-release cycles from 0 to ``max_strain_pct`` and back."""
    cfg = cfg or ProtocolConfig()
    if cfg.max_strain_pct > spec.materials.failure_strain_pct:
        raise ProtocolError(
            f"schedule reaches {cfg.max_strain_pct:g}% but the sensor fails at "
            f"{spec.materials.failure_strain_pct:g}%"
        )
    rng = np.random.default_rng(cfg.rng_seed)
    bench = Bench(spec, rng)
    out = LogBuilder(cfg.sample_rate_hz)
    unit, sid = spec.reading_unit, spec.sensor_id
    levels = cfg.strain_levels()
    for cycle in range(1, cfg.cycles + 1):
        bench.set_strain(0.0)
        out.block(cycle, "baseline", 0.0, bench.meter.sample(cfg.baseline_samples), unit, sid)
        for phase, sweep in (("stretch", levels), ("release", levels[-2::-1])):
            for s in sweep:
                bench.set_strain(float(s))
                out.block(cycle, phase, float(s), bench.meter.sample(cfg.samples_per_point), unit, sid, cfg.hold_s)
    return out.build()


def run_to_failure(spec: SensorSpec, cfg: ProtocolConfig | None = None) -> MeasurementLog:
    """Step the strain up until the sample breaks; the last row is an open circuit."""
    cfg = cfg or ProtocolConfig()
    rng = np.random.default_rng(cfg.rng_seed)
    bench = Bench(spec, rng)
    out = LogBuilder(cfg.sample_rate_hz)
    unit, sid = spec.reading_unit, spec.sensor_id
    bench.set_strain(0.0)
    out.block(0, "baseline", 0.0, bench.meter.sample(cfg.baseline_samples), unit, sid)
    k = 1
    while True:
        s = round(k * cfg.strain_step_pct, 9)
        bench.set_strain(s)
        if bench.sensor.broken:
            out.block(0, "failure_run", s, bench.meter.sample(1), unit, sid)
            break
        out.block(0, "failure_run", s, bench.meter.sample(cfg.samples_per_point), unit, sid, cfg.hold_s)
        k += 1
    return out.build()


def _unique_ids(specs: list[SensorSpec]) -> list[str]:
    ids = [s.sensor_id for s in specs]
    if len(set(ids)) == len(ids):
        return ids
    return [f"{sid}-{i + 1}" for i, sid in enumerate(ids)]


def perturb_spec(spec: SensorSpec, factor: float) -> SensorSpec:
    """Scale the material constant that sets the zero value by ``factor``."""
    m = spec.materials
    if spec.kind == "capacitive":
        m = replace(m, rel_permittivity=m.rel_permittivity * factor)
    else:
        m = replace(m, resistivity_ohm_m=m.resistivity_ohm_m * factor)
    return replace(spec, materials=m)


def calibrated_spec(spec: SensorSpec, target_zero: float, sensor_id: str | None = None) -> SensorSpec:
    """Copy of ``spec`` whose zero value equals ``target_zero`` (same geometry)."""
    scaled = perturb_spec(spec, target_zero / zero_value(spec))
    return replace(scaled, sensor_id=sensor_id or spec.sensor_id)


def record_repeatability(
    specs: list[SensorSpec],
    cfg: ProtocolConfig | None = None,
    variability_rel: float = 0.0,
    swap_time_s: float = 30.0,
) -> MeasurementLog:
    """Baseline recordings of several sensors, one after another.

    ``variability_rel`` draws a per-sensor multiplicative perturbation
    ``1 + variability_rel * N(0, 1)`` of the resistivity (resistive) or the
    permittivity (capacitive) to emulate fabrication scatter.
    """
    if not specs:
        raise ProtocolError("need at least one sensor")
    cfg = cfg or ProtocolConfig()
    rng = np.random.default_rng(cfg.rng_seed)
    out = LogBuilder(cfg.sample_rate_hz)
    for spec, sid in zip(specs, _unique_ids(specs)):
        if variability_rel > 0:
            spec = perturb_spec(spec, max(1e-6, 1.0 + variability_rel * rng.standard_normal()))
        bench = Bench(spec, rng)
        bench.set_strain(0.0)
        out.block(0, "baseline", 0.0, bench.meter.sample(cfg.baseline_samples), spec.reading_unit, sid)
        out.idle(swap_time_s)
    return out.build()


def run_repeatability(
    specs: list[SensorSpec],
    cfg: ProtocolConfig | None = None,
    variability_rel: float = 0.0,
) -> list[tuple[str, float]]:
    """Zero value (baseline mean) of each sensor."""
    log = record_repeatability(specs, cfg, variability_rel)
    results = []
    for sid in log.sensors:
        values = log.reading_value[log.sensor_id == sid]
        means, _ = kernels.group_means(np.zeros(values.shape[0], dtype=np.int64), values, 1)
        results.append((sid, float(means[0])))
    return results
