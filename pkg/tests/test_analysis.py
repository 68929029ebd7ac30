import math
import random

import numpy as np
import pytest

import oracles
from helpers import spec_with
from diwbench.analysis import (
    CycleCurve,
    build_curves,
    characterize,
    degree_of_hysteresis,
    fit_linear,
    fit_points,
    repeatability_stats,
    stretchability,
)
from diwbench.errors import DegenerateCurve, FitError, InsufficientData, MissingBaseline, NotAFailureRun
from diwbench.harness import ProtocolConfig, run_cyclic, run_to_failure
from diwbench.measurement import LogBuilder
from diwbench.reported import (
    ZERO_CAPACITANCE_PF,
    ZERO_CAPACITANCE_STATS,
    ZERO_RESISTANCE_KOHM,
    ZERO_RESISTANCE_STATS,
)


def _curve(up, down):
    return CycleCurve(1, 1.0, np.asarray(up, float), np.asarray(down, float))


def test_build_curves_noiseless():
    log = run_cyclic(spec_with("capacitive", noise_std_rel=0.0), ProtocolConfig(cycles=2))
    curves = build_curves(log)
    assert [c.cycle_index for c in curves] == [1, 2]
    assert curves[0].stretch_points[-1, 0] == 300
    assert curves[0].stretch_points[-1, 1] == pytest.approx(2.85, abs=1e-12)
    assert curves[0].release_points[0, 0] == 275


def test_build_curves_constant_readings():
    b = LogBuilder(10.0)
    b.block(1, "baseline", 0.0, [5.0] * 4, "Ω", "x")
    for s in (0.0, 50.0, 100.0):
        b.block(1, "stretch", s, [5.0] * 3, "Ω", "x")
    (curve,) = build_curves(b.build())
    assert np.all(curve.stretch_points[:, 1] == 0)


def test_missing_baseline():
    log = run_cyclic(spec_with("resistive"), ProtocolConfig(cycles=4))
    keep = ~((log.cycle == 3) & (log.phase == "baseline"))
    with pytest.raises(MissingBaseline) as err:
        build_curves(log.select(keep))
    assert err.value.cycle == 3


def test_dh_identical_curves():
    pts = [(0, 0), (100, 1), (200, 2)]
    assert degree_of_hysteresis(_curve(pts, pts[::-1])) == 0.0


def test_dh_triangles():
    # stretch area 2.0, release area 1.5 over strain fraction 0..2
    up = [(0, 0), (200, 2.0)]
    down = [(200, 1.5), (0, 0)]
    assert degree_of_hysteresis(_curve(up, down)) == pytest.approx(25.0)


def test_dh_degenerate():
    with pytest.raises(DegenerateCurve):
        degree_of_hysteresis(_curve([(0, 0)], [(0, 0)]))
    with pytest.raises(DegenerateCurve):
        degree_of_hysteresis(_curve([(0, 0), (100, 0)], [(0, 0)]))


def test_dh_scale_invariant():
    rng = np.random.default_rng(3)
    x = np.linspace(0, 300, 13)
    up = np.column_stack([x, x / 100 + rng.random(13) * 0.1])
    down = np.column_stack([x[::-1], up[::-1, 1] * 0.9])
    base = degree_of_hysteresis(_curve(up, down))
    for k in (0.01, 3.0, 1e6):
        scaled = _curve(np.column_stack([up[:, 0], k * up[:, 1]]), np.column_stack([down[:, 0], k * down[:, 1]]))
        assert degree_of_hysteresis(scaled) == pytest.approx(base, rel=1e-12)


@pytest.mark.parametrize("kind, target", [("capacitive", 1.36), ("resistive", 21.88)])
def test_dh_at_default_sampling(kind, target):
    log = run_cyclic(spec_with(kind, noise_std_rel=0.0), ProtocolConfig(cycles=1))
    (curve,) = build_curves(log)
    assert degree_of_hysteresis(curve) == pytest.approx(target, abs=1e-9)


def test_fit_collinear():
    gf, r2 = fit_linear([_curve([(0, 0), (100, 1), (200, 2)], [])], stretch_only=True)
    assert gf == pytest.approx(1.0) and r2 == 1.0
    assert fit_points([0, 1, 2], [0, 1, 2]) == pytest.approx((1.0, 0.0, 1.0))


def test_fit_singular():
    with pytest.raises(FitError):
        fit_points([1.0, 1.0, 1.0], [0, 1, 2])


def test_fit_matches_oracle():
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = rng.uniform(0, 3, 20)
        y = rng.normal(size=20) + 2 * x
        got = fit_points(x, y)
        want = oracles.normal_equations_fit(x, y)
        assert got == pytest.approx(want, abs=1e-9)


def test_r2_drops_with_noise():
    x = np.linspace(0, 3, 25)
    drops = 0
    for seed in range(30):
        noise = np.random.default_rng(seed).normal(0, 0.2, 25)
        drops += fit_points(x, 2 * x + noise)[2] < 1.0
    assert drops == 30


def test_noiseless_capacitive_fit():
    log = run_cyclic(spec_with("capacitive", noise_std_rel=0.0, dh_target_pct=0.0))
    gf, r2 = fit_linear(build_curves(log))
    assert gf == pytest.approx(0.95, abs=1e-9)
    assert r2 == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("kind", ["capacitive", "resistive"])
def test_end_to_end_noiseless_recovery(kind):
    spec = spec_with(kind, noise_std_rel=0.0)
    report = characterize(run_cyclic(spec), stretch_only=True)
    assert report.gauge_factor == pytest.approx(spec.gauge_factor, abs=1e-6)
    assert report.dh_pct_mean == pytest.approx(spec.materials.dh_target_pct, abs=1e-6)


@pytest.mark.parametrize("kind, value", [("capacitive", 550.0), ("resistive", 600.0)])
def test_stretchability(kind, value):
    assert stretchability(run_to_failure(spec_with(kind))) == value


def test_stretchability_first_step():
    assert stretchability(run_to_failure(spec_with("resistive", failure_strain_pct=10.0))) == 0.0


def test_not_a_failure_run():
    with pytest.raises(NotAFailureRun):
        stretchability(run_cyclic(spec_with("capacitive"), ProtocolConfig(cycles=1)))


def test_repeatability_table_values():
    mean, std, rel = repeatability_stats(ZERO_RESISTANCE_KOHM)
    assert (round(mean, 2), round(std, 2), round(rel, 1)) == ZERO_RESISTANCE_STATS
    mean, std, rel = repeatability_stats(ZERO_CAPACITANCE_PF)
    assert (round(mean, 2), round(std, 2), round(rel, 1)) == ZERO_CAPACITANCE_STATS
    assert repeatability_stats(ZERO_RESISTANCE_KOHM) == pytest.approx(oracles.sample_stats(ZERO_RESISTANCE_KOHM))


def test_repeatability_constant_and_short():
    assert repeatability_stats([5, 5, 5]) == (5.0, 0.0, 0.0)
    with pytest.raises(InsufficientData):
        repeatability_stats([1.0])


def test_repeatability_permutation_invariant():
    values = list(ZERO_CAPACITANCE_PF)
    ref = repeatability_stats(values)
    rnd = random.Random(0)
    for _ in range(20):
        rnd.shuffle(values)
        assert repeatability_stats(values) == ref


def test_characterize_report_shape(cap_spec):
    report = characterize(run_cyclic(cap_spec))
    d = report.to_dict()
    assert 0.0 <= d["r_squared"] <= 1.0
    assert len(d["dh_pct_per_cycle"]) == 5 and len(d["curves"]) == 5
    assert d["fit_phases"] == "stretch+release"
    assert math.isfinite(d["gauge_factor"])
