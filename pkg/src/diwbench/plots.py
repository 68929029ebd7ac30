"""Plot-data CSV series and static SVG figures for a characterisation run."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .analysis import CharacterizationReport, mean_curve, zero_values
from .measurement import MeasurementLog, format_float


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(v) if isinstance(v, float) else v for v in row])


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "diwbench"
    matplotlib.rcParams["svg.fonttype"] = "none"
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    return plt, fig, ax


def _save(plt, fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def _failure_curve(log: MeasurementLog):
    base = log.reading_value[log.phase == "baseline"]
    rows = (log.phase == "failure_run") & np.isfinite(log.reading_value)
    if base.size == 0 or not np.any(rows):
        return None
    zero = float(np.mean(base))
    strains = np.unique(log.strain_pct[rows])
    rel = np.array([np.mean(log.reading_value[rows & (log.strain_pct == s)]) for s in strains])
    return strains, (rel - zero) / zero


def write_plots(report: CharacterizationReport, log: MeasurementLog, out_dir) -> list[Path]:
    """Write every figure the report supports; returns the created files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if report.curves:
        curve = report.curves[0]
        rows = [("stretch", float(s), float(r)) for s, r in curve.stretch_points]
        rows += [("release", float(s), float(r)) for s, r in curve.release_points]
        path = out / "loop_cycle.csv"
        _write_csv(path, ["phase", "strain_pct", "relative_change"], rows)
        written.append(path)

        plt, fig, ax = _figure()
        ax.plot(curve.stretch_points[:, 0], curve.stretch_points[:, 1], "o-", label="stretch")
        if curve.release_points.shape[0]:
            ax.plot(curve.release_points[:, 0], curve.release_points[:, 1], "s--", label="release")
        ax.set_xlabel("strain (%)")
        ax.set_ylabel("relative change")
        ax.set_title(f"cycle {curve.cycle_index}")
        ax.legend()
        path = out / "loop_cycle.svg"
        _save(plt, fig, path)
        written.append(path)

        phases = report.fit_phases.split("+") if report.fit_phases else ["stretch"]
        rows = []
        plt, fig, ax = _figure()
        for phase in phases:
            strain, mean, std = mean_curve(report.curves, phase)
            fit = report.gauge_factor * strain / 100.0 + report.intercept
            rows += [(phase, float(s), float(m), float(d), float(f)) for s, m, d, f in zip(strain, mean, std, fit)]
            ax.errorbar(strain, mean, yerr=std, fmt="o", capsize=2, label=f"{phase} mean")
        xs = np.array([0.0, max(r[1] for r in rows)])
        ax.plot(xs, report.gauge_factor * xs / 100.0 + report.intercept, "k-",
                label=f"fit GF={report.gauge_factor:.4g}, R²={report.r_squared:.4g}")
        ax.set_xlabel("strain (%)")
        ax.set_ylabel("mean relative change")
        ax.legend()
        path = out / "linear_fit.csv"
        _write_csv(path, ["phase", "strain_pct", "mean_relative_change", "std_relative_change", "fit"], rows)
        written.append(path)
        path = out / "linear_fit.svg"
        _save(plt, fig, path)
        written.append(path)

    failure = _failure_curve(log) if report.stretchability_pct is not None else None
    if failure is not None:
        strains, rel = failure
        path = out / "strain_to_failure.csv"
        _write_csv(path, ["strain_pct", "relative_change"], [(float(s), float(r)) for s, r in zip(strains, rel)])
        written.append(path)
        plt, fig, ax = _figure()
        ax.plot(strains, rel, "o-")
        ax.axvline(report.stretchability_pct, color="grey", linestyle=":")
        ax.set_xlabel("strain (%)")
        ax.set_ylabel("relative change")
        ax.set_title(f"failure after {report.stretchability_pct:g}%")
        path = out / "strain_to_failure.svg"
        _save(plt, fig, path)
        written.append(path)

    zeros = zero_values(log)
    if any(len(v) > 1 for v in zeros.values()):
        rows = [(sid, unit, float(v)) for unit, items in zeros.items() for sid, v in items]
        path = out / "zero_values.csv"
        _write_csv(path, ["sensor_id", "unit", "zero_value"], rows)
        written.append(path)
    return written
