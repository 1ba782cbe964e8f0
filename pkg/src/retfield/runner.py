"""Task execution and artifact emission for configured runs.

Each task samples what it needs, writes its artifacts, and contributes an
entry to the run report.  Grid evaluation may fan out over a thread pool;
results are always assembled in (radius, time) order before writing, so
artifacts are byte-identical regardless of the worker count.  A physics
check that fails (e.g. a front check on a leaky pulse) is recorded in the
report but is not an execution error; only exceptions mark a task failed.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .analysis import (
    WaveformSeries,
    feature_arrival_times,
    light_front_check,
    local_velocity,
    sample_waveforms,
    zone_scaling_fit,
)
from .config import RunConfig
from .evaluators import EVALUATORS, ObservationPoint, RESIDUAL_FLOOR
from .quadrature import build_rule

_CSV_HEADER = (
    "r,t,Ex,Ey,Ez,term1x,term1y,term1z,term2x,term2y,term2z,"
    "term3x,term3y,term3z,representation"
)


def _fmt(value: float) -> str:
    return f"{value:.17g}"


@dataclass
class TaskReport:
    name: str
    status: str = "ok"
    seconds: float = 0.0
    artifacts: list[str] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    def to_mapping(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status,
            "seconds": self.seconds,
            "artifacts": self.artifacts,
            "details": self.details,
        }


@dataclass
class RunReport:
    config: dict[str, Any]
    output_directory: str = ""
    tasks: list[TaskReport] = field(default_factory=list)

    def any_errors(self) -> bool:
        return any(task.status == "error" for task in self.tasks)

    def to_mapping(self) -> dict[str, Any]:
        return {
            "tool": {"name": "retfield", "version": __version__},
            "config": self.config,
            "output_directory": self.output_directory,
            "tasks": [task.to_mapping() for task in self.tasks],
        }


def emit_waveform_csv(series: WaveformSeries, path: Path | str) -> Path:
    """Write a series in the fixed column schema, rows sorted by (r, t).

    Two-term decompositions leave the term3 columns zero-filled.  Floats
    carry 17 significant digits so values round-trip exactly.
    """
    if series.radii.size == 0 or series.times.size == 0:
        raise ValueError("refusing to write an empty waveform series")
    path = Path(path)
    lines = [_CSV_HEADER]
    zero = np.zeros(3)
    for i, r in enumerate(series.radii):
        for j, t in enumerate(series.times):
            cell = series.samples[i][j]
            terms = list(cell.terms.values())
            while len(terms) < 3:
                terms.append(zero)
            row = [_fmt(r), _fmt(t)]
            row.extend(_fmt(v) for v in cell.total)
            for term in terms[:3]:
                row.extend(_fmt(v) for v in term)
            row.append(cell.representation)
            lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    return path


def emit_velocity_csv(profile, path: Path | str) -> Path:
    """Write per-segment velocities: r_mid, t_star_lo, t_star_hi, v."""
    path = Path(path)
    lines = ["r_mid,t_star_lo,t_star_hi,v"]
    for i, v in enumerate(profile.velocities):
        r_mid = 0.5 * (profile.radii[i] + profile.radii[i + 1])
        lines.append(
            ",".join(
                [
                    _fmt(r_mid),
                    _fmt(profile.arrival_times[i]),
                    _fmt(profile.arrival_times[i + 1]),
                    _fmt(v),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n")
    return path


def _calibrated_rule(src, config: RunConfig, constants):
    """Pick the working quadrature order by refining at a probe point.

    The probe sits at the closest radius (most demanding kernel) at a time
    when the pulse is in full swing there; the ladder stops once the total
    field changes by less than the configured tolerance.
    """
    origin = np.asarray(config.ray_origin)
    direction = np.asarray(config.ray_direction)
    point = origin + min(config.radii) * direction
    t_probe = (
        config.t_on
        + src.domain.exterior_distance(point) / constants.c
        + 0.5 * config.tau
    )
    obs = ObservationPoint(x=point, t=t_probe)
    evaluate = EVALUATORS[config.representation]

    previous = None
    err = float("inf")
    rule = None
    for order in range(config.base_order, config.max_order + 1, 2):
        rule = build_rule(src.domain, order)
        total = evaluate(src, obs, rule, constants).total
        if previous is not None:
            err = float(np.max(np.abs(total - previous)))
            if err <= config.tol:
                break
        previous = total
    return rule, err


def _series(src, config, constants, rule, representation, threads) -> WaveformSeries:
    return sample_waveforms(
        src,
        representation,
        config.ray_origin,
        config.ray_direction,
        np.asarray(config.radii),
        np.asarray(config.times),
        rule,
        constants,
        component_axis=np.asarray(config.component_axis),
        threads=threads,
    )


def _task_decompose(src, config, constants, rule, outdir, threads, fmts) -> TaskReport:
    report = TaskReport(name="decompose")
    series = _series(src, config, constants, rule, config.representation, threads)
    if "csv" in fmts:
        name = f"waveform_{config.representation}.csv"
        emit_waveform_csv(series, outdir / name)
        report.artifacts.append(name)
    peak = float(np.abs(series.component()).max())
    report.details = {"representation": config.representation, "peak_component": peak}
    return report


def _task_compare(src, config, constants, rule, outdir, threads, fmts) -> TaskReport:
    report = TaskReport(name="compare")
    series = {}
    for representation in ("zones", "jefimenko"):
        series[representation] = _series(
            src, config, constants, rule, representation, threads
        )
        if "csv" in fmts:
            name = f"waveform_{representation}.csv"
            emit_waveform_csv(series[representation], outdir / name)
            report.artifacts.append(name)
    e_zone = series["zones"].total_field()
    e_jef = series["jefimenko"].total_field()
    scale = np.maximum(
        np.maximum(
            np.linalg.norm(e_zone, axis=-1), np.linalg.norm(e_jef, axis=-1)
        ),
        RESIDUAL_FLOOR,
    )
    residuals = np.linalg.norm(e_zone - e_jef, axis=-1) / scale
    report.details = {
        "residual_max": float(residuals.max()),
        "residual_mean": float(residuals.mean()),
        "points": int(residuals.size),
        "boundary_leakage": src.boundary_leakage(),
    }
    return report


def _task_frontcheck(src, config, constants, rule, outdir, threads, fmts) -> TaskReport:
    report = TaskReport(name="frontcheck")
    details = {}
    for representation in ("zones", "jefimenko"):
        series = _series(src, config, constants, rule, representation, threads)
        result = light_front_check(series, src, constants)
        details[representation] = {
            "max_precursor": result.max_precursor,
            "peak": result.peak,
            "passed": result.passed,
        }
    details["passed"] = all(details[r]["passed"] for r in ("zones", "jefimenko"))
    report.details = details
    return report


def _task_velocity(src, config, constants, rule, outdir, threads, fmts) -> TaskReport:
    report = TaskReport(name="velocity")
    series = _series(src, config, constants, rule, config.representation, threads)
    arrivals = feature_arrival_times(series, config.feature, config.window)
    profile = local_velocity(series.radii, arrivals, config.feature)
    if "csv" in fmts:
        emit_velocity_csv(profile, outdir / "velocity.csv")
        report.artifacts.append("velocity.csv")
    front = light_front_check(series, src, constants)
    finite = profile.velocities[np.isfinite(profile.velocities)]
    report.details = {
        "feature": config.feature,
        "representation": config.representation,
        "min_velocity": float(finite.min()) if finite.size else None,
        "negative_segments": [list(seg) for seg in profile.negative_segments()],
        "front_check_passed": front.passed,
    }
    return report


def _task_scaling(src, config, constants, rule, outdir, threads, fmts) -> TaskReport:
    """Fit falloff exponents: near in the static tail, the others at the pulse."""
    report = TaskReport(name="scaling")
    series = _series(src, config, constants, rule, "zones", threads)
    r_far = max(config.radii)
    passage_end = config.t_on + config.tau + (r_far + src.domain.diameter()) / constants.c
    static_window = (passage_end, config.times[-1])
    if static_window[1] <= static_window[0]:
        raise ValueError(
            "time grid ends before the field settles; extend [observation] times "
            f"past {passage_end:.6g} for the static near-term fit"
        )
    moving_window = (config.times[0], passage_end)
    exponents = {
        "near": zone_scaling_fit(series, "near", static_window),
        "intermediate": zone_scaling_fit(series, "intermediate", moving_window),
        "far": zone_scaling_fit(series, "far", moving_window),
    }
    if "csv" in fmts:
        path = outdir / "scaling.csv"
        lines = ["r,near,intermediate,far"]
        for i, r in enumerate(series.radii):
            amps = [
                np.linalg.norm(series.term_field(term)[i], axis=-1).max()
                for term in ("near", "intermediate", "far")
            ]
            lines.append(",".join([_fmt(r)] + [_fmt(a) for a in amps]))
        path.write_text("\n".join(lines) + "\n")
        report.artifacts.append("scaling.csv")
    report.details = {
        "exponents": exponents,
        "static_window": list(static_window),
        "moving_window": list(moving_window),
    }
    return report


_TASK_RUNNERS = {
    "decompose": _task_decompose,
    "compare": _task_compare,
    "frontcheck": _task_frontcheck,
    "velocity": _task_velocity,
    "scaling": _task_scaling,
}


def run_tasks(
    config: RunConfig,
    output_dir: Path | str | None = None,
    threads: int = 1,
) -> RunReport:
    """Execute the configured tasks in order and write all artifacts.

    Returns the report; it is also written as report.json when the json
    format is enabled.  Task exceptions are captured per task (status
    "error") rather than aborting the remaining tasks.
    """
    outdir = Path(output_dir) if output_dir is not None else Path(config.output_directory)
    outdir.mkdir(parents=True, exist_ok=True)
    constants = config.build_constants()
    src = config.build_source()
    report = RunReport(config=config.to_mapping(), output_directory=str(outdir))
    fmts = config.output_formats

    rule = None
    calibration_error = None
    if config.tasks:
        rule, calibration_error = _calibrated_rule(src, config, constants)

    for name in config.tasks:
        task_report = TaskReport(name=name)
        start = time.perf_counter()
        try:
            task_report = _TASK_RUNNERS[name](
                src, config, constants, rule, outdir, threads, fmts
            )
        except Exception as exc:
            task_report.status = "error"
            task_report.details = {"error": f"{type(exc).__name__}: {exc}"}
        task_report.seconds = time.perf_counter() - start
        task_report.details.setdefault("quadrature", {
            "order": rule.order,
            "error_estimate": calibration_error,
        })
        report.tasks.append(task_report)

    if "json" in fmts:
        mapping = report.to_mapping()
        (outdir / "report.json").write_text(json.dumps(mapping, indent=2) + "\n")
    return report
