"""Sensor geometry, materials and the forward electrical models.

Two sensor kinds share one layered silicone body:

* capacitive - two circular carbon-grease electrodes separated by a
  dielectric silicone layer, ``C = eps0 * eps_r * A / d``;
* resistive - one serpentine carbon-grease trace, ``R = rho * L / A_r``.

Under strain both respond linearly (gauge factor times strain fraction) on
loading. Unloading follows the loading line minus a closed "bump" whose area
is chosen so the loop reproduces a target degree of hysteresis exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .errors import DegenerateCycle, FailureExceeded, InvalidSpec, WrongSensorKind

VACUUM_PERMITTIVITY = 8.854e-12  # F/m

SensorKind = Literal["capacitive", "resistive"]
LoopShape = Literal["tent", "parabolic"]
KINDS = ("capacitive", "resistive")
LOOP_SHAPES = ("tent", "parabolic")


@dataclass(frozen=True)
class SerpentinePattern:
    """Boustrophedon strain-gauge trace; passes run along the strain axis."""

    width_mm: float = 10.0
    length_mm: float = 20.0
    line_width_mm: float = 0.5
    line_separation_mm: float = 1.4
    pad_side_mm: float = 3.0

    def __post_init__(self):
        if not self.line_width_mm > 0:
            raise InvalidSpec("line_width_mm must be > 0")
        if not self.line_separation_mm >= 0:
            raise InvalidSpec("line_separation_mm must be >= 0")
        if not self.width_mm >= self.line_width_mm:
            raise InvalidSpec("width_mm must be >= line_width_mm")
        if not self.length_mm > 0:
            raise InvalidSpec("length_mm must be > 0")
        if not self.pad_side_mm > 0:
            raise InvalidSpec("pad_side_mm must be > 0")

    @property
    def pitch_mm(self) -> float:
        return self.line_width_mm + self.line_separation_mm

    @property
    def pass_count(self) -> int:
        # small epsilon so exact fits (10 = 6*0.5 + 5*1.4) are not lost to rounding
        return int(math.floor((self.width_mm - self.line_width_mm) / self.pitch_mm + 1e-9)) + 1


@dataclass(frozen=True)
class CircularElectrode:
    diameter_mm: float = 12.0
    lead_length_mm: float = 8.0
    pad_side_mm: float = 3.0

    def __post_init__(self):
        if not self.diameter_mm > 0:
            raise InvalidSpec("diameter_mm must be > 0")
        if not self.lead_length_mm >= 0:
            raise InvalidSpec("lead_length_mm must be >= 0")
        if not self.pad_side_mm > 0:
            raise InvalidSpec("pad_side_mm must be > 0")

    @property
    def area_m2(self) -> float:
        r = self.diameter_mm / 2 * 1e-3
        return math.pi * r * r


@dataclass(frozen=True)
class LayerStack:
    """Silicone layers bottom to top; ink prints sit on each internal interface."""

    layer_thicknesses_mm: tuple[float, ...] = (0.75, 0.5, 0.75)
    ink_layer_thickness_mm: float = 0.15
    total_thickness_mm: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "layer_thicknesses_mm", tuple(float(t) for t in self.layer_thicknesses_mm))
        if any(not t > 0 for t in self.layer_thicknesses_mm):
            raise InvalidSpec("layer thicknesses must be > 0")
        if not self.ink_layer_thickness_mm > 0:
            raise InvalidSpec("ink_layer_thickness_mm must be > 0")
        if not self.total_thickness_mm > 0:
            raise InvalidSpec("total_thickness_mm must be > 0")

    @property
    def poured_thickness_mm(self) -> float:
        return math.fsum(self.layer_thicknesses_mm)

    @property
    def dielectric_gap_mm(self) -> float:
        if len(self.layer_thicknesses_mm) < 3:
            raise InvalidSpec("a dielectric gap needs at least three layers")
        return self.layer_thicknesses_mm[1]


@dataclass(frozen=True)
class MaterialParams:
    resistivity_ohm_m: float = 0.1234
    rel_permittivity: float = 3.35
    vacuum_permittivity: float = VACUUM_PERMITTIVITY
    failure_strain_pct: float = 550.0
    gf_capacitive: float = 0.95
    gf_resistive: float = 16.83
    dh_target_pct: float = 1.36
    noise_std_rel: float = 0.003
    loop_shape: str = "tent"

    def __post_init__(self):
        for name in ("rel_permittivity", "vacuum_permittivity", "gf_capacitive", "gf_resistive"):
            if not getattr(self, name) > 0:
                raise InvalidSpec(f"{name} must be > 0")
        # zero is a legitimate limiting value for these (noiseless runs, ideal conductor, brittle sample)
        for name in ("resistivity_ohm_m", "failure_strain_pct", "noise_std_rel"):
            if not getattr(self, name) >= 0:
                raise InvalidSpec(f"{name} must be >= 0")
        if not 0 <= self.dh_target_pct < 100:
            raise InvalidSpec("dh_target_pct must lie in [0, 100)")
        if self.loop_shape not in LOOP_SHAPES:
            raise InvalidSpec(f"loop_shape must be one of {LOOP_SHAPES}")

    @classmethod
    def defaults(cls, kind: str) -> "MaterialParams":
        if kind == "capacitive":
            return cls(failure_strain_pct=550.0, dh_target_pct=1.36)
        if kind == "resistive":
            return cls(failure_strain_pct=600.0, dh_target_pct=21.88)
        raise InvalidSpec(f"unknown sensor kind {kind!r}")


@dataclass(frozen=True)
class SensorSpec:
    kind: str
    pattern: SerpentinePattern | CircularElectrode
    stack: LayerStack = field(default_factory=LayerStack)
    footprint_mm: tuple[float, float] = (25.0, 60.0)
    materials: MaterialParams | None = None
    sensor_id: str = "sensor"
    # free length between the clamps, used to convert strain to rail travel
    gauge_length_mm: float = 40.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown sensor kind {self.kind!r}")
        if self.materials is None:
            object.__setattr__(self, "materials", MaterialParams.defaults(self.kind))
        object.__setattr__(self, "footprint_mm", tuple(float(v) for v in self.footprint_mm))
        if len(self.footprint_mm) != 2 or min(self.footprint_mm) <= 0:
            raise InvalidSpec("footprint_mm must be two positive lengths")
        if not self.gauge_length_mm > 0:
            raise InvalidSpec("gauge_length_mm must be > 0")
        if self.kind == "capacitive":
            if not isinstance(self.pattern, CircularElectrode):
                raise InvalidSpec("capacitive sensors use a CircularElectrode")
            if len(self.stack.layer_thicknesses_mm) < 3:
                raise InvalidSpec("capacitive sensors need at least three silicone layers")
        elif not isinstance(self.pattern, SerpentinePattern):
            raise InvalidSpec("resistive sensors use a SerpentinePattern")

    @property
    def ink_prints(self) -> int:
        return 2 if self.kind == "capacitive" else 1

    @property
    def gauge_factor(self) -> float:
        m = self.materials
        return m.gf_capacitive if self.kind == "capacitive" else m.gf_resistive

    @property
    def reading_unit(self) -> str:
        return "F" if self.kind == "capacitive" else "Ω"

    @classmethod
    def default(cls, kind: str, **overrides) -> "SensorSpec":
        pattern = CircularElectrode() if kind == "capacitive" else SerpentinePattern()
        spec = cls(kind=kind, pattern=pattern, sensor_id=kind[:3])
        return replace(spec, **overrides) if overrides else spec


def serpentine_trace_length(pattern: SerpentinePattern) -> float:
    """Centerline length in mm of the passes and their connectors (pads excluded)."""
    n = pattern.pass_count
    return n * pattern.length_mm + (n - 1) * pattern.pitch_mm


def zero_capacitance(spec: SensorSpec) -> float:
    """Unstrained parallel-plate capacitance in farads."""
    if spec.kind != "capacitive":
        raise WrongSensorKind("zero_capacitance needs a capacitive sensor")
    m = spec.materials
    d = spec.stack.dielectric_gap_mm * 1e-3
    return m.vacuum_permittivity * m.rel_permittivity * spec.pattern.area_m2 / d


def zero_resistance(spec: SensorSpec) -> float:
    """Unstrained trace resistance in ohms."""
    if spec.kind != "resistive":
        raise WrongSensorKind("zero_resistance needs a resistive sensor")
    length = serpentine_trace_length(spec.pattern) * 1e-3
    area = spec.pattern.line_width_mm * 1e-3 * spec.stack.ink_layer_thickness_mm * 1e-3
    return spec.materials.resistivity_ohm_m * length / area


def zero_value(spec: SensorSpec) -> float:
    return zero_capacitance(spec) if spec.kind == "capacitive" else zero_resistance(spec)


def _check_strain(spec: SensorSpec, strain_pct):
    s = np.asarray(strain_pct, dtype=float)
    if np.any(s < 0):
        raise ValueError("strain must be non-negative")
    if np.any(s > spec.materials.failure_strain_pct):
        raise FailureExceeded(
            f"strain {float(np.max(s))}% beyond failure strain {spec.materials.failure_strain_pct}%"
        )
    return s


def _scalar_or_array(values, like):
    return float(values) if np.ndim(like) == 0 else values


def response_stretch(spec: SensorSpec, strain_pct):
    """Relative change (dC/C or dR/R) on the loading branch."""
    s = _check_strain(spec, strain_pct)
    return _scalar_or_array(spec.gauge_factor * s / 100.0, strain_pct)


def stretch_area(spec: SensorSpec, strain_max_pct: float) -> float:
    """Area under the loading branch from 0 to ``strain_max_pct`` (strain as a fraction)."""
    s_max = strain_max_pct / 100.0
    return spec.gauge_factor * s_max * s_max / 2.0


def hysteresis_bump(spec: SensorSpec, strain_pct, strain_max_pct: float):
    """Drop of the unloading branch below the loading branch.

    The bump vanishes at both ends of the cycle and encloses
    ``dh_target * stretch_area`` so the loop carries exactly the target
    degree of hysteresis. ``tent`` is piecewise linear with its apex at
    half the peak strain, so trapezoidal areas on any grid containing
    the apex are exact; ``parabolic`` is ``beta * s * (s_max - s) / s_max**2``.
    """
    if not strain_max_pct > 0:
        raise DegenerateCycle("cycle peak strain must be > 0")
    s = np.asarray(strain_pct, dtype=float) / 100.0
    s_max = strain_max_pct / 100.0
    target = spec.materials.dh_target_pct / 100.0
    area = stretch_area(spec, strain_max_pct)
    if spec.materials.loop_shape == "parabolic":
        beta = 6.0 * target * area / s_max
        bump = beta * s * (s_max - s) / (s_max * s_max)
    else:
        peak = 2.0 * target * area / s_max
        bump = peak * (1.0 - np.abs(2.0 * s / s_max - 1.0))
    return _scalar_or_array(bump, strain_pct)


def response_release(spec: SensorSpec, strain_pct, strain_max_pct: float):
    """Relative change on the unloading branch of a cycle peaking at ``strain_max_pct``."""
    if not strain_max_pct > 0:
        raise DegenerateCycle("cycle peak strain must be > 0")
    s = np.asarray(strain_pct, dtype=float)
    if np.any(s < 0) or np.any(s > strain_max_pct):
        raise ValueError("release strain must lie within [0, strain_max_pct]")
    out = np.asarray(response_stretch(spec, s)) - np.asarray(hysteresis_bump(spec, s, strain_max_pct))
    return _scalar_or_array(out, strain_pct)
