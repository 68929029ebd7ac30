"""Compile sensor patterns into syringe-extrusion G-code and fabrication plans.

Coordinates are machine millimetres. Patterns are laid out in a tray-local
frame whose origin is the tray centre (``PrintParams.tray_center_mm``) with
the strain axis along Y. Every printing move deposits a bead of
``line_width_mm x ink_layer_height_mm``; the matching plunger travel is

    E = segment_length * line_width * ink_layer_height / syringe_cross_section

Feature comments (``;TYPE:TRACE``, ``;TYPE:PAD``, ``;TYPE:INFILL``,
``;TYPE:LEAD``) tag the moves that follow so downstream tools can separate
the sensing trace from the contact pads.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Union

import numpy as np

from .errors import BoundsError, EmptyFill, InvalidSpec, PlanError
from .gcode import GCodeProgram
from .sensor import CircularElectrode, SensorSpec, SerpentinePattern

_EPS = 1e-9

Point = tuple[float, float]


@dataclass(frozen=True)
class PrintParams:
    line_width_mm: float = 0.515
    infill_pct: float = 100.0
    wall_line_count: int = 0
    print_speed_mm_s: float = 5.0
    retraction_enabled: bool = True
    retraction_mm_E: float = 0.5
    nozzle_inner_diameter_mm: float = 0.515
    syringe_inner_diameter_mm: float = 12.0
    ink_layer_height_mm: float = 0.15
    travel_speed_mm_s: float = 30.0
    retraction_speed_mm_s: float = 5.0
    z_hop_mm: float = 1.0
    tray_size_mm: tuple[float, float] = (25.0, 60.0)
    tray_center_mm: tuple[float, float] = (175.0, 175.0)

    def __post_init__(self):
        object.__setattr__(self, "tray_size_mm", tuple(float(v) for v in self.tray_size_mm))
        object.__setattr__(self, "tray_center_mm", tuple(float(v) for v in self.tray_center_mm))
        for name in (
            "line_width_mm",
            "print_speed_mm_s",
            "retraction_mm_E",
            "nozzle_inner_diameter_mm",
            "syringe_inner_diameter_mm",
            "ink_layer_height_mm",
            "travel_speed_mm_s",
            "retraction_speed_mm_s",
        ):
            if not getattr(self, name) > 0:
                raise InvalidSpec(f"{name} must be > 0")
        if not 0 < self.infill_pct <= 100:
            raise InvalidSpec("infill_pct must lie in (0, 100]")
        if self.wall_line_count != 0:
            raise InvalidSpec("only wall-less fills (wall_line_count = 0) are supported")
        if self.z_hop_mm < 0:
            raise InvalidSpec("z_hop_mm must be >= 0")
        if abs(self.line_width_mm - self.nozzle_inner_diameter_mm) > 1e-12:
            raise InvalidSpec("line_width_mm must equal nozzle_inner_diameter_mm")
        if len(self.tray_size_mm) != 2 or min(self.tray_size_mm) <= 0:
            raise InvalidSpec("tray_size_mm must be two positive lengths")

    @property
    def syringe_area_mm2(self) -> float:
        r = self.syringe_inner_diameter_mm / 2
        return math.pi * r * r

    def extrusion_for(self, length_mm: float) -> float:
        return length_mm * self.line_width_mm * self.ink_layer_height_mm / self.syringe_area_mm2


# ---------------------------------------------------------------------------
# fabrication plan steps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StackTray:
    index: int


@dataclass(frozen=True)
class PourSilicone:
    thickness_mm: float


@dataclass(frozen=True)
class Cure:
    temp_C: float = 45.0
    minutes: float = 10.0


@dataclass(frozen=True)
class PrintInk:
    layer_index: int
    z_mm: float
    program: GCodeProgram = field(compare=False, repr=False)


Step = Union[StackTray, PourSilicone, Cure, PrintInk]


@dataclass
class FabricationPlan:
    sensor_id: str
    kind: str
    spec_hash: str
    steps: list[Step]

    @property
    def prints(self) -> list[PrintInk]:
        return [s for s in self.steps if isinstance(s, PrintInk)]

    @property
    def poured_thickness_mm(self) -> float:
        return math.fsum(s.thickness_mm for s in self.steps if isinstance(s, PourSilicone))


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

def serpentine_polyline(pattern: SerpentinePattern) -> list[Point]:
    """Vertices of the trace in tray-local coordinates, first pass going +Y."""
    n = pattern.pass_count
    pitch = pattern.pitch_mm
    half_l = pattern.length_mm / 2
    x0 = -(n - 1) * pitch / 2
    points: list[Point] = []
    for i in range(n):
        x = x0 + i * pitch
        ys = (-half_l, half_l) if i % 2 == 0 else (half_l, -half_l)
        points.append((x, ys[0]))
        points.append((x, ys[1]))
    return points


def pad_rings(center: Point, side_mm: float, line_width_mm: float) -> list[Point]:
    """Concentric square passes at line-width pitch, outermost first, as one polyline."""
    cx, cy = center
    points: list[Point] = []
    h = side_mm / 2 - line_width_mm / 2
    if h <= _EPS:
        return [(cx - side_mm / 2, cy), (cx + side_mm / 2, cy)]
    while h > _EPS:
        points.extend([(cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h), (cx - h, cy + h), (cx - h, cy - h)])
        h -= line_width_mm
    return points


def chord_offsets(diameter_mm: float, spacing_mm: float) -> np.ndarray:
    """Centre offsets of parallel fill lines whose centres lie inside the circle."""
    count = int(math.floor(diameter_mm / spacing_mm + _EPS))
    return (np.arange(count) - (count - 1) / 2) * spacing_mm


def electrode_chords(diameter_mm: float, spacing_mm: float) -> list[list[tuple[Point, Point]]]:
    """Two orthogonal chord families (along X, then along Y) clipped to the circle."""
    r = diameter_mm / 2
    offsets = chord_offsets(diameter_mm, spacing_mm)
    half = np.sqrt(np.maximum(r * r - offsets * offsets, 0.0))
    along_x = [((-h, o), (h, o)) for o, h in zip(offsets.tolist(), half.tolist())]
    along_y = [((o, -h), (o, h)) for o, h in zip(offsets.tolist(), half.tolist())]
    return [along_x, along_y]


def order_nearest(chords: list[tuple[Point, Point]], start: Point) -> list[tuple[Point, Point]]:
    """Greedy nearest-endpoint ordering; ties go to the lower index and the first endpoint."""
    remaining = list(range(len(chords)))
    pos = start
    ordered = []
    while remaining:
        best = None
        for idx in remaining:
            a, b = chords[idx]
            for flip, p in ((False, a), (True, b)):
                d = (p[0] - pos[0]) ** 2 + (p[1] - pos[1]) ** 2
                if best is None or d < best[0] - 1e-12:
                    best = (d, idx, flip)
        _, idx, flip = best
        a, b = chords[idx]
        seg = (b, a) if flip else (a, b)
        ordered.append(seg)
        pos = seg[1]
        remaining.remove(idx)
    return ordered


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _digest(payload: dict) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=list)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


class _Writer:
    """Accumulates moves, handling travel, retraction and feature tags."""

    def __init__(self, params: PrintParams, z_mm: float):
        self.p = params
        self.z = z_mm
        self.prog = GCodeProgram()
        self.pos: Point | None = None
        self.pressurised = False
        self.feature: str | None = None
        self.polylines: list[tuple[str, list[Point]]] = []

    def header(self, lines: dict) -> None:
        for key, value in lines.items():
            self.prog.comment(f"{key}={value}")
        self.prog.add("G90")
        self.prog.add("M83")
        self.prog.add("G92", E=0.0)
        self.prog.add("G28", X=None, Y=None, Z=None)
        self.prog.add("G0", Z=self.z + self.p.z_hop_mm, F=self._travel_feed)

    @property
    def _travel_feed(self) -> float:
        return 60.0 * self.p.travel_speed_mm_s

    def _abs(self, pt: Point) -> Point:
        cx, cy = self.p.tray_center_mm
        return (cx + pt[0], cy + pt[1])

    def travel(self, pt: Point) -> None:
        target = self._abs(pt)
        if self.pos is not None and math.dist(self.pos, target) < _EPS:
            return
        p = self.p
        retract = p.retraction_enabled and self.pressurised
        if retract:
            self.prog.add("G1", E=-p.retraction_mm_E, F=60.0 * p.retraction_speed_mm_s)
        if self.pos is not None:
            self.prog.add("G0", Z=self.z + p.z_hop_mm, F=self._travel_feed)
        self.prog.add("G0", X=target[0], Y=target[1], F=self._travel_feed)
        self.prog.add("G0", Z=self.z, F=self._travel_feed)
        if retract:
            self.prog.add("G1", E=p.retraction_mm_E, F=60.0 * p.retraction_speed_mm_s)
        self.pressurised = False
        self.pos = target

    def polyline(self, feature: str, points: list[Point]) -> None:
        self.polylines.append((feature, points))
        self.travel(points[0])
        if feature != self.feature:
            self.prog.comment(f"TYPE:{feature}")
            self.feature = feature
        feed = 60.0 * self.p.print_speed_mm_s
        for pt in points[1:]:
            target = self._abs(pt)
            length = math.dist(self.pos, target)
            if length < _EPS:
                continue
            self.prog.add("G1", X=target[0], Y=target[1], E=self.p.extrusion_for(length), F=feed)
            self.pos = target
            self.pressurised = True

    def finish(self) -> GCodeProgram:
        self.prog.comment("TYPE:END")
        self.prog.add("G0", Z=self.z + 5.0, F=self._travel_feed)
        return self.prog


def _check_tray(polylines: list[tuple[str, list[Point]]], params: PrintParams) -> None:
    half_w = params.tray_size_mm[0] / 2
    half_l = params.tray_size_mm[1] / 2
    margin = params.line_width_mm / 2
    for feature, pts in polylines:
        for x, y in pts:
            if abs(x) + margin > half_w + _EPS or abs(y) + margin > half_l + _EPS:
                raise BoundsError(
                    f"{feature} point ({x:.3f}, {y:.3f}) mm leaves the "
                    f"{params.tray_size_mm[0]:g} x {params.tray_size_mm[1]:g} mm tray"
                )


def _params_header(kind: str, params: PrintParams, geometry, z_mm: float, extra: dict | None) -> dict:
    head = {"diwbench": "toolpath", "feature": kind}
    if extra:
        head.update(extra)
    head["source_hash"] = _digest({"geometry": asdict(geometry), "params": asdict(params), "z_mm": z_mm})
    for key, value in asdict(geometry).items():
        head[f"geometry.{key}"] = repr(value)
    for key, value in asdict(params).items():
        head[f"params.{key}"] = repr(value)
    head["z_mm"] = repr(z_mm)
    return head


def compile_serpentine(
    pattern: SerpentinePattern,
    params: PrintParams | None = None,
    *,
    z_mm: float = 0.0,
    header: dict | None = None,
) -> GCodeProgram:
    """Boustrophedon strain-gauge trace with a filled square pad at each end."""
    params = params or PrintParams()
    trace = serpentine_polyline(pattern)
    side = pattern.pad_side_mm
    start, end = trace[0], trace[-1]
    # pads sit just beyond the trace ends, continuing the pass direction
    end_dir = 1.0 if end[1] > 0 else -1.0
    pad_a = pad_rings((start[0], start[1] - side / 2), side, params.line_width_mm)
    pad_b = pad_rings((end[0], end[1] + end_dir * side / 2), side, params.line_width_mm)
    plan = [("PAD", pad_a), ("TRACE", trace), ("PAD", pad_b)]
    _check_tray(plan, params)

    w = _Writer(params, z_mm)
    w.header(_params_header("serpentine", params, pattern, z_mm, header))
    for feature, pts in plan:
        w.polyline(feature, pts)
    return w.finish()


def compile_electrode(
    electrode: CircularElectrode,
    params: PrintParams | None = None,
    *,
    z_mm: float = 0.0,
    lead_direction: int = -1,
    header: dict | None = None,
) -> GCodeProgram:
    """Grid-infilled disc (two orthogonal chord families), lead line and contact pad."""
    params = params or PrintParams()
    if electrode.diameter_mm < params.line_width_mm - _EPS:
        raise EmptyFill(
            f"electrode diameter {electrode.diameter_mm} mm is below the line width {params.line_width_mm} mm"
        )
    if lead_direction not in (-1, 1):
        raise ValueError("lead_direction must be -1 or +1")
    spacing = params.line_width_mm * 100.0 / params.infill_pct
    families = electrode_chords(electrode.diameter_mm, spacing)
    if not families[0]:
        raise EmptyFill("no fill line fits inside the electrode")
    r = electrode.diameter_mm / 2
    lead_end = r + electrode.lead_length_mm
    side = electrode.pad_side_mm
    pad = pad_rings((0.0, lead_direction * (lead_end + side / 2)), side, params.line_width_mm)
    lead = [(0.0, lead_direction * r), (0.0, lead_direction * lead_end)]

    plan: list[tuple[str, list[Point]]] = []
    pos: Point = families[0][0][0]
    for family in families:
        for a, b in order_nearest(family, pos):
            plan.append(("INFILL", [a, b]))
            pos = b
    if electrode.lead_length_mm > 0:
        plan.append(("LEAD", lead))
    plan.append(("PAD", pad))
    _check_tray(plan, params)

    w = _Writer(params, z_mm)
    w.header(_params_header("electrode", params, electrode, z_mm, header))
    for feature, pts in plan:
        w.polyline(feature, pts)
    return w.finish()


def spec_hash(spec: SensorSpec) -> str:
    return _digest({"kind": spec.kind, "spec": asdict(spec)})


def emit_fabrication_plan(spec: SensorSpec, params: PrintParams | None = None) -> FabricationPlan:
    """Layer-wise tray process: per silicone layer stack a tray, pour, cure, then print ink."""
    params = params or PrintParams()
    params = replace(params, tray_size_mm=spec.footprint_mm)
    layers = spec.stack.layer_thicknesses_mm
    if not layers:
        raise PlanError("layer stack is empty")
    total = math.fsum(layers)
    if abs(total - spec.stack.total_thickness_mm) > 1e-9:
        raise PlanError(
            f"layers sum to {total:g} mm but the stack declares {spec.stack.total_thickness_mm:g} mm"
        )
    if len(layers) < spec.ink_prints + 1:
        raise PlanError(f"{spec.kind} sensors need {spec.ink_prints + 1} silicone layers to encapsulate the ink")

    digest = spec_hash(spec)
    steps: list[Step] = []
    cumulative = 0.0
    for i, thickness in enumerate(layers):
        steps.append(StackTray(i))
        steps.append(PourSilicone(thickness))
        steps.append(Cure())
        cumulative += thickness
        if i < spec.ink_prints:
            z = round(cumulative, 9)
            head = {"spec_hash": digest, "sensor_id": spec.sensor_id, "layer_index": i + 1}
            if spec.kind == "capacitive":
                # leads leave in opposite directions so the two contacts do not overlap
                prog = compile_electrode(spec.pattern, params, z_mm=z, lead_direction=-1 if i == 0 else 1, header=head)
            else:
                prog = compile_serpentine(spec.pattern, params, z_mm=z, header=head)
            steps.append(PrintInk(i + 1, z, prog))
    return FabricationPlan(spec.sensor_id, spec.kind, digest, steps)
