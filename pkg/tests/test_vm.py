import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specgen import random_spec
from diwbench.gcode import GCodeProgram, emit, parse
from diwbench.sensor import CircularElectrode, SerpentinePattern
from diwbench.toolpath import PrintParams, compile_electrode, compile_serpentine, emit_fabrication_plan
from diwbench.vm import execute


def _prog(text):
    return parse("G90\nM83\n" + text)


def test_extrude_without_motion():
    _, report = execute(_prog("G1 X10 Y10 F300\nG1 E0.1\n"))
    assert report.violation_kinds() == ["ExtrudeWithoutMotion"]
    assert report.violations[0].line == 4


def test_prime_after_retraction_is_allowed():
    _, report = execute(_prog("G1 X10 Y10 F300\nG1 E-0.5\nG0 X20 Y20 F1800\nG1 E0.5 F300\n"))
    assert report.ok
    assert report.retracted_e == pytest.approx(report.unretracted_e)


def test_prime_beyond_retraction_is_flagged():
    _, report = execute(_prog("G1 X10 Y10 F300\nG1 E-0.5\nG1 E0.7\n"))
    assert "ExtrudeWithoutMotion" in report.violation_kinds()


def test_out_of_bounds():
    _, report = execute(_prog("G1 X400 Y10 F300\nG1 X10 Y-1\n"))
    assert report.violation_kinds() == ["OutOfBounds", "OutOfBounds"]


def test_negative_feed_and_no_feed():
    _, report = execute(_prog("G1 X1 Y1\nG1 X2 Y2 F-5\n"))
    kinds = report.violation_kinds()
    assert "NoFeedRate" in kinds and "NegativeFeed" in kinds


def test_empty_program():
    segments, report = execute(GCodeProgram())
    assert segments == [] and report.ok and report.moves == 0


def test_print_time_constant_feed():
    _, report = execute(_prog("G1 X10 Y0 F600\nG1 X10 Y30 E0.01\n"))
    # 10 mm travel + 30 mm print at 10 mm/s
    assert report.print_time_s == pytest.approx(4.0)
    assert report.deposited_length_mm == pytest.approx(30.0)


def test_absolute_extrusion_mode():
    _, report = execute(parse("G90\nG92 E0\nG1 X10 Y10 F300\nG1 X20 Y10 E1\nG1 X30 Y10 E3\n"))
    assert report.deposited_e == pytest.approx(3.0)


@pytest.mark.parametrize(
    "program",
    [compile_serpentine(SerpentinePattern()), compile_electrode(CircularElectrode())],
    ids=["serpentine", "electrode"],
)
def test_compiler_output_clean(program):
    segments, report = execute(program)
    assert report.ok
    assert report.retracted_e == pytest.approx(report.unretracted_e, abs=1e-12)
    assert all(abs(s.implied_line_width_mm - 0.515) < 1e-6 for s in segments)


def _conservation(program, params):
    segments, report = execute(program, params)
    length = sum(s.length_mm for s in segments)
    expected = length * params.line_width_mm * params.ink_layer_height_mm
    assert report.deposited_e * params.syringe_area_mm2 == pytest.approx(expected, rel=1e-9)
    assert sum(s.volume_mm3 for s in segments) == pytest.approx(report.deposited_e * params.syringe_area_mm2, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_conservation_and_bounds_random_specs(seed):
    spec = random_spec(np.random.default_rng(seed))
    params = PrintParams(tray_size_mm=spec.footprint_mm)
    cx, cy = params.tray_center_mm
    hx, hy = params.tray_size_mm[0] / 2, params.tray_size_mm[1] / 2
    for step in emit_fabrication_plan(spec).prints:
        _conservation(step.program, params)
        segments, report = execute(step.program, params)
        assert report.ok
        for s in segments:
            for x, y in (s.start, s.end):
                assert cx - hx - 1e-9 <= x <= cx + hx + 1e-9
                assert cy - hy - 1e-9 <= y <= cy + hy + 1e-9
        text = emit(step.program)
        assert emit(parse(text)) == text


@settings(max_examples=100, deadline=None)
@given(text=st.text(alphabet="GMXYZEF0123456789.- \n;", max_size=200))
def test_execute_is_total(text):
    try:
        program = parse(text)
    except ValueError:
        return
    execute(program)
