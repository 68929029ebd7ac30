"""Virtual syringe printer.

Runs a parsed program against a simple machine model (constant-feed
kinematics, no acceleration) and returns the deposited bead segments plus an
execution report. Defects are collected as violations instead of raised, so a
single report lists every problem in a file.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .gcode import GCodeProgram
from .toolpath import PrintParams

ENVELOPE_MM = (350.0, 350.0, 400.0)
_EPS = 1e-9


@dataclass
class MachineState:
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    extruder_e: float = 0.0
    feed_rate: float = 0.0
    absolute_xyz: bool = True
    relative_e: bool = False


@dataclass(frozen=True)
class DepositedSegment:
    start: tuple[float, float]
    end: tuple[float, float]
    z: float
    volume_mm3: float
    implied_line_width_mm: float
    feature: str | None = None
    line: int = 0

    @property
    def length_mm(self) -> float:
        return math.dist(self.start, self.end)


@dataclass(frozen=True)
class Violation:
    kind: str
    line: int
    message: str


@dataclass
class ExecutionReport:
    moves: int = 0
    segments: int = 0
    deposited_length_mm: float = 0.0
    deposited_volume_mm3: float = 0.0
    deposited_e: float = 0.0
    positive_e: float = 0.0
    retracted_e: float = 0.0
    unretracted_e: float = 0.0
    print_time_s: float = 0.0
    extrusion_time_s: float = 0.0
    travel_time_s: float = 0.0
    feature_length_mm: dict[str, float] = field(default_factory=dict)
    feature_time_s: dict[str, float] = field(default_factory=dict)
    violations: list[Violation] = field(default_factory=list)
    final_state: MachineState = field(default_factory=MachineState)

    @property
    def ok(self) -> bool:
        return not self.violations

    def violation_kinds(self) -> list[str]:
        return [v.kind for v in self.violations]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ok"] = self.ok
        return out


def execute(
    program: GCodeProgram,
    params: PrintParams | None = None,
    envelope_mm: tuple[float, float, float] = ENVELOPE_MM,
) -> tuple[list[DepositedSegment], ExecutionReport]:
    params = params or PrintParams()
    area = params.syringe_area_mm2
    state = MachineState()
    report = ExecutionReport()
    violations = report.violations

    starts: list[tuple[float, float, float]] = []
    ends: list[tuple[float, float, float]] = []
    des: list[float] = []
    feeds: list[float] = []
    lines: list[int] = []
    features: list[str | None] = []

    feature = None
    for cmd in program:
        if cmd.code is None:
            if cmd.comment and cmd.comment.startswith("TYPE:"):
                feature = cmd.comment[5:].strip() or None
            continue
        code = cmd.code
        if code == "G90":
            state.absolute_xyz = True
        elif code == "M83":
            state.relative_e = True
        elif code == "G92":
            pos = list(state.position)
            for i, axis in enumerate("XYZ"):
                if cmd.has(axis):
                    pos[i] = cmd.get(axis)
            state.position = tuple(pos)
            if cmd.has("E"):
                state.extruder_e = cmd.get("E")
        elif code == "G28":
            axes = [a for a in "XYZ" if cmd.has(a)] or list("XYZ")
            pos = list(state.position)
            for axis in axes:
                pos["XYZ".index(axis)] = 0.0
            state.position = tuple(pos)
        elif cmd.is_motion:
            if cmd.has("F"):
                f = cmd.get("F")
                if f <= 0:
                    violations.append(Violation("NegativeFeed", cmd.line, f"feed rate F{f:g} must be > 0"))
                else:
                    state.feed_rate = f
            start = state.position
            end = list(start)
            for i, axis in enumerate("XYZ"):
                if cmd.has(axis):
                    v = cmd.get(axis)
                    end[i] = v if state.absolute_xyz else start[i] + v
            de = 0.0
            if cmd.has("E"):
                e = cmd.get("E")
                de = e if state.relative_e else e - state.extruder_e
                state.extruder_e = state.extruder_e + e if state.relative_e else e
            end = tuple(end)
            if end == start and de == 0.0:
                continue
            if state.feed_rate <= 0:
                violations.append(Violation("NoFeedRate", cmd.line, "move issued before any valid feed rate"))
            starts.append(start)
            ends.append(end)
            des.append(de)
            feeds.append(state.feed_rate)
            lines.append(cmd.line)
            features.append(feature)
            state.position = end

    report.moves = len(starts)
    report.final_state = state
    if not starts:
        return [], report

    lo = np.zeros(3)
    hi = np.asarray(envelope_mm, dtype=float)
    xy_len, _, duration, oob = kernels.segment_kinematics(
        np.asarray(starts), np.asarray(ends), np.asarray(des), np.asarray(feeds), lo, hi
    )

    segments: list[DepositedSegment] = []
    debt = 0.0
    h = params.ink_layer_height_mm
    for i in range(len(starts)):
        de = des[i]
        moved = xy_len[i] > _EPS
        if oob[i]:
            x, y, z = ends[i]
            violations.append(
                Violation("OutOfBounds", lines[i], f"target ({x:g}, {y:g}, {z:g}) outside the {envelope_mm} mm envelope")
            )
        if de > 0:
            report.positive_e += de
            if moved:
                volume = de * area
                segments.append(
                    DepositedSegment(
                        start=starts[i][:2],
                        end=ends[i][:2],
                        z=ends[i][2],
                        volume_mm3=volume,
                        implied_line_width_mm=volume / (float(xy_len[i]) * h),
                        feature=features[i],
                        line=lines[i],
                    )
                )
                report.deposited_e += de
                report.deposited_length_mm += float(xy_len[i])
                report.extrusion_time_s += float(duration[i])
                key = features[i] or "UNTAGGED"
                report.feature_length_mm[key] = report.feature_length_mm.get(key, 0.0) + float(xy_len[i])
                report.feature_time_s[key] = report.feature_time_s.get(key, 0.0) + float(duration[i])
            elif de <= debt + _EPS:
                report.unretracted_e += de
                debt = max(0.0, debt - de)
                report.travel_time_s += float(duration[i])
            else:
                violations.append(
                    Violation("ExtrudeWithoutMotion", lines[i], f"E{de:g} extruded without XY motion")
                )
                debt = 0.0
                report.travel_time_s += float(duration[i])
        else:
            if de < 0:
                report.retracted_e += -de
                debt += -de
            report.travel_time_s += float(duration[i])

    report.segments = len(segments)
    report.deposited_volume_mm3 = report.deposited_e * area
    report.print_time_s = float(np.sum(duration))
    violations.sort(key=lambda v: v.line)
    return segments, report
