"""Command-line entry point: ``diwbench compile|verify|experiment|analyze``.

Exit codes are a stable contract: 0 success, 1 user or input error,
2 internal pipeline error. Failures also print one JSON object on stderr.
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

import click

from . import __version__
from .analysis import DISPLAY_UNITS, characterize
from .config import dump_specs, dump_yaml, load_config, load_specs, plan_to_dict
from .errors import GCodeError, InvalidSpec, ProtocolError, WorkbenchError
from .gcode import emit, parse
from .harness import record_repeatability, run_cyclic, run_to_failure
from .measurement import read_csv
from .plots import write_plots
from .sensor import SensorSpec
from .toolpath import emit_fabrication_plan
from .vm import execute

PROTOCOLS = ("cyclic", "failure", "repeatability")


def _num(value: float) -> str:
    return f"{value:.6g}"


def _fail(code: int, exc: BaseException | str, **extra) -> None:
    payload = {"error": type(exc).__name__ if isinstance(exc, BaseException) else "Error",
               "message": str(exc), "exit_code": code}
    for attr in ("line", "row", "cycle"):
        if hasattr(exc, attr):
            payload[attr] = getattr(exc, attr)
    payload.update(extra)
    click.echo(json.dumps(payload, ensure_ascii=False), err=True)
    raise SystemExit(code)


class _Workbench(click.Group):
    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.exceptions.Abort:
            _fail(1, "aborted")
        except click.ClickException as exc:
            # usage problems are user errors, not click's default status 2
            _fail(1, exc)
        if standalone_mode:
            sys.exit(rv if isinstance(rv, int) else 0)
        return rv


def _load_one_or_many(ctx, spec_path) -> list[SensorSpec]:
    cfg = ctx.obj
    try:
        return load_specs(cfg.resolve_spec(spec_path), cfg.materials)
    except (WorkbenchError, OSError) as exc:
        _fail(1, exc)


@click.group(cls=_Workbench)
@click.version_option(__version__, prog_name="diwbench")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="Workbench YAML config (default: $DIWBENCH_CONFIG).")
@click.pass_context
def cli(ctx, config_path):
    """Design-to-metrics workbench for printed stretchable strain sensors."""
    try:
        ctx.obj = load_config(config_path)
    except WorkbenchError as exc:
        _fail(1, exc)


@cli.command("new-spec")
@click.option("--kind", type=click.Choice(["capacitive", "resistive"]), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--sensor-id", default=None)
@click.pass_obj
def new_spec(cfg, kind, out_path, sensor_id):
    """Write the default sensor spec of KIND as an editable YAML file."""
    spec = SensorSpec.default(kind, materials=cfg.materials[kind])
    if sensor_id:
        spec = replace(spec, sensor_id=sensor_id)
    Path(out_path).write_text(dump_specs([spec]), encoding="utf-8")
    click.echo(f"wrote {out_path}")


def _layer_paths(out: Path, count: int) -> list[Path]:
    if count == 1:
        return [out]
    return [out.with_name(f"{out.stem}.L{k}{out.suffix}") for k in range(1, count + 1)]


@cli.command("compile")
@click.option("--spec", "spec_path", required=True, help="Sensor spec YAML.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True, help="G-code output file.")
@click.option("--plan", "plan_path", type=click.Path(dir_okay=False), default=None,
              help="Fabrication plan output (default: <out>.plan.yaml).")
@click.pass_context
def compile_cmd(ctx, spec_path, out_path, plan_path):
    """Compile a sensor spec into G-code and a layer-wise fabrication plan."""
    cfg = ctx.obj
    specs = _load_one_or_many(ctx, spec_path)
    if len(specs) != 1:
        _fail(1, InvalidSpec("compile takes a file holding exactly one sensor"))
    spec = specs[0]
    try:
        plan = emit_fabrication_plan(spec, cfg.print_params)
    except WorkbenchError as exc:
        _fail(2, exc)

    out = Path(out_path)
    if cfg.output_dir is not None and not out.is_absolute():
        out = cfg.output_dir / out
    out.parent.mkdir(parents=True, exist_ok=True)
    paths = _layer_paths(out, len(plan.prints))
    params = replace(cfg.print_params, tray_size_mm=spec.footprint_mm)

    click.echo(f"sensor: {spec.sensor_id} ({spec.kind})")
    click.echo(f"silicone_layers: {len(spec.stack.layer_thicknesses_mm)}")
    click.echo(f"ink_prints: {len(plan.prints)}")
    for step, path in zip(plan.prints, paths):
        _, report = execute(step.program, params)
        if report.violations:
            _fail(2, WorkbenchError(f"compiled layer {step.layer_index} has violations"),
                  violations=[v.__dict__ for v in report.violations])
        path.write_text(emit(step.program), encoding="utf-8")
        feature = "TRACE" if spec.kind == "resistive" else "INFILL"
        click.echo(
            f"layer {step.layer_index}: z_mm={_num(step.z_mm)} "
            f"{feature.lower()}_length_mm={_num(report.feature_length_mm.get(feature, 0.0))} "
            f"deposited_length_mm={_num(report.deposited_length_mm)} "
            f"{feature.lower()}_print_time_s={_num(report.feature_time_s.get(feature, 0.0))} "
            f"total_time_s={_num(report.print_time_s)} gcode={path.name}"
        )
    plan_file = Path(plan_path) if plan_path else out.with_name(out.stem + ".plan.yaml")
    plan_file.write_text(
        dump_yaml(plan_to_dict(plan, {s.layer_index: p.name for s, p in zip(plan.prints, paths)})),
        encoding="utf-8",
    )
    click.echo(f"plan: {plan_file.name} ({len(plan.steps)} steps)")


@cli.command("verify")
@click.argument("gcode_file", type=click.Path(dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="JSON execution report.")
@click.pass_obj
def verify_cmd(cfg, gcode_file, out_path):
    """Execute GCODE_FILE on the virtual printer; exit 0 iff no violations."""
    try:
        text = Path(gcode_file).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(1, exc)
    try:
        program = parse(text)
    except GCodeError as exc:
        _fail(2, exc)
    _, report = execute(program, cfg.print_params)
    click.echo(f"moves: {report.moves}")
    click.echo(f"segments: {report.segments}")
    click.echo(f"deposited_length_mm: {_num(report.deposited_length_mm)}")
    click.echo(f"deposited_volume_mm3: {_num(report.deposited_volume_mm3)}")
    click.echo(f"print_time_s: {_num(report.print_time_s)}")
    for feature, length in sorted(report.feature_length_mm.items()):
        click.echo(f"feature {feature}: length_mm={_num(length)} time_s={_num(report.feature_time_s[feature])}")
    click.echo(f"violations: {len(report.violations)}")
    for v in report.violations:
        click.echo(f"  line {v.line}: {v.kind}: {v.message}")
    if out_path:
        Path(out_path).write_text(json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    if report.violations:
        raise SystemExit(1)


@cli.command("experiment")
@click.option("--spec", "spec_path", required=True, help="Sensor spec YAML (one or several sensors).")
@click.option("--protocol", required=True, help="cyclic | failure | repeatability")
@click.option("--seed", type=int, default=None, help="RNG seed (default: config protocol seed).")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True, help="Measurement CSV.")
@click.option("--count", type=int, default=7, show_default=True,
              help="Replicas for repeatability when the spec file holds one sensor.")
@click.option("--variability", type=float, default=0.0, show_default=True,
              help="Relative std of per-sensor material scatter for repeatability.")
@click.pass_context
def experiment_cmd(ctx, spec_path, protocol, seed, out_path, count, variability):
    """Run a virtual bench protocol and write the measurement log."""
    cfg = ctx.obj
    if protocol not in PROTOCOLS:
        _fail(1, ProtocolError(f"unknown protocol {protocol!r}; choose from {', '.join(PROTOCOLS)}"))
    specs = _load_one_or_many(ctx, spec_path)
    proto = cfg.protocol if seed is None else replace(cfg.protocol, rng_seed=seed)
    try:
        if protocol == "repeatability":
            if len(specs) == 1:
                if count < 1:
                    raise ProtocolError("--count must be >= 1")
                specs = [replace(specs[0], sensor_id=f"{specs[0].sensor_id}-{i + 1}") for i in range(count)]
            log = record_repeatability(specs, proto, variability)
        else:
            if len(specs) != 1:
                raise ProtocolError(f"{protocol} runs one sensor; the spec file holds {len(specs)}")
            runner = run_cyclic if protocol == "cyclic" else run_to_failure
            log = runner(specs[0], proto)
    except WorkbenchError as exc:
        _fail(1, exc)
    out = Path(out_path)
    if cfg.output_dir is not None and not out.is_absolute():
        out = cfg.output_dir / out
    out.parent.mkdir(parents=True, exist_ok=True)
    log.write_csv(out)
    click.echo(f"rows: {len(log)}")
    click.echo(f"sensors: {', '.join(log.sensors)}")
    if protocol == "failure":
        finite = log.strain_pct[(log.phase == "failure_run") & (log.reading_value < float("inf"))]
        click.echo(f"last_valid_strain_pct: {_num(float(finite.max()) if finite.size else 0.0)}")
    click.echo(f"wrote {out}")


@cli.command("analyze")
@click.argument("csv_in", type=click.Path(dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="JSON report.")
@click.option("--plots", "plots_dir", type=click.Path(file_okay=False), default=None, help="Plot output directory.")
@click.option("--stretch-only", is_flag=True, help="Fit the stretch branch only.")
def analyze_cmd(csv_in, out_path, plots_dir, stretch_only):
    """Compute hysteresis, gauge factor, linearity, stretchability and zero-value stats."""
    try:
        log = read_csv(csv_in)
    except OSError as exc:
        _fail(1, exc)
    except WorkbenchError as exc:
        _fail(1, exc)
    try:
        report = characterize(log, stretch_only=stretch_only)
    except (WorkbenchError, ValueError) as exc:
        _fail(1, exc)

    if report.dh_pct_mean is not None:
        click.echo(f"DH_pct: {_num(report.dh_pct_mean)}")
        click.echo("DH_pct_per_cycle: " + " ".join(_num(v) for v in report.dh_pct_per_cycle))
    if report.gauge_factor is not None:
        click.echo(f"GF: {_num(report.gauge_factor)}")
        click.echo(f"R2: {_num(report.r_squared)}")
        click.echo(f"fit_phases: {report.fit_phases}")
    if report.stretchability_pct is not None:
        click.echo(f"stretchability_pct: {_num(report.stretchability_pct)}")
    for z in report.zero_value_stats:
        name, scale = DISPLAY_UNITS[z.unit]
        click.echo(
            f"zero_values[{name}]: n={z.n} mean={_num(z.mean * scale)} sample_std={_num(z.sample_std * scale)} "
            f"relative_std_pct={_num(z.relative_std_pct)}"
        )
    if out_path:
        Path(out_path).write_text(json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    if plots_dir:
        for path in write_plots(report, log, plots_dir):
            click.echo(f"plot: {path.name}")


def main() -> None:
    cli(prog_name="diwbench")


if __name__ == "__main__":  # pragma: no cover
    main()
