"""End-to-end runs: simulate, analyze, and write the output tree.

Every output is a UTF-8, LF-terminated CSV with a header row; floats are
rendered with shortest round-trip precision, so identical inputs produce
byte-identical trees.  write_outputs finishes by emitting manifest.csv,
which lists every written file with its SHA-256 checksum.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .adaptometry import (
    CorrelationMatrix,
    IndicatorResult,
    build_parameter_matrix,
    correlation_matrix,
    detect_structure_change,
    export_surface,
    integral_indicator,
)
from .dynamics import Trajectory, simulate
from .policy import (
    MeasureEffect,
    damage_assessment,
    disturbance_sensitivity,
    evaluate_measure,
)
from .scenario import Scenario, format_float, render_resolved
from .core import CONTROL_IDS, ValidationError

MODES = ("baseline", "sanctions", "compare", "measures")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    sha256: str
    size: int


@dataclass(frozen=True)
class RunAnalysis:
    """One simulated run plus its correlation analysis."""

    trajectory: Trajectory
    correlations: Mapping[str, CorrelationMatrix]
    indicators: Mapping[str, IndicatorResult]


@dataclass(frozen=True)
class PipelineResult:
    mode: str
    out_dir: Path
    manifest: tuple[ManifestEntry, ...]
    analyses: Mapping[str, RunAnalysis]
    measures: tuple[MeasureEffect, ...] = ()


def run_scenario(scenario: Scenario, with_regimes: bool) -> RunAnalysis:
    """Simulate the scenario (optionally without its regimes) and analyze it."""
    trajectory = simulate(
        scenario.zone, scenario.grid, scenario.controls, scenario.disturbances,
        regimes=scenario.regimes if with_regimes else (),
        policy=scenario.policy, seed=scenario.seed,
        spectral_delta=scenario.spectral_delta)
    correlations = {}
    indicators = {}
    for ent_id in trajectory.enterprises:
        matrix = build_parameter_matrix(trajectory, ent_id,
                                        scenario.adaptometry.selection)
        corr = correlation_matrix(matrix)
        indicator = integral_indicator(corr, scenario.adaptometry.variant)
        breaks = detect_structure_change(corr, scenario.adaptometry.drop_threshold)
        correlations[ent_id] = corr
        indicators[ent_id] = replace(indicator, break_periods=tuple(breaks))
    return RunAnalysis(trajectory, correlations, indicators)


# ---------------------------------------------------------------------------
# CSV rendering
# ---------------------------------------------------------------------------

def _csv_bytes(header: str, rows) -> bytes:
    out = io.StringIO()
    out.write(header + "\n")
    for row in rows:
        out.write(",".join(row) + "\n")
    return out.getvalue().encode("utf-8")


def _matrix_csv(names, values: np.ndarray) -> bytes:
    t_max = values.shape[1]
    header = "parameter," + ",".join(str(t) for t in range(1, t_max + 1))
    rows = ([name] + [format_float(v) for v in values[i]]
            for i, name in enumerate(names))
    return _csv_bytes(header, rows)


def _series_csv(header: str, series: np.ndarray) -> bytes:
    rows = ([str(t + 1), format_float(v)] for t, v in enumerate(series))
    return _csv_bytes(header, rows)


def _run_files(prefix: str, analysis: RunAnalysis) -> dict[str, bytes]:
    files: dict[str, bytes] = {}
    trajectory = analysis.trajectory
    for ent_id, traj in trajectory.enterprises.items():
        files[f"{prefix}/trajectory_{ent_id}.csv"] = _matrix_csv(
            traj.parameter_names, traj.realized.values)
        files[f"{prefix}/plan_{ent_id}.csv"] = _matrix_csv(
            traj.parameter_names, traj.plan)
        obs_names = ["grp"] + [f"y{k}" for k in range(2, traj.observations.shape[0] + 1)]
        files[f"{prefix}/observations_{ent_id}.csv"] = _matrix_csv(
            obs_names, traj.observations)
        files[f"{prefix}/state_{ent_id}.csv"] = _csv_bytes(
            "period,cash,warehouse,debt",
            ([str(t + 1), format_float(traj.cash[t]), format_float(traj.warehouse[t]),
              format_float(traj.debt[t])] for t in range(traj.t_max)))
        surface = export_surface(analysis.correlations[ent_id])
        files[f"{prefix}/surface_{ent_id}.csv"] = _csv_bytes(
            "t,s,r", ([str(t), str(s), format_float(r)] for t, s, r in surface))
        files[f"{prefix}/g_series_{ent_id}.csv"] = _series_csv(
            "t,G", analysis.indicators[ent_id].series)
    files[f"{prefix}/zone_grp.csv"] = _series_csv("period,grp", trajectory.zone_grp)
    files[f"{prefix}/events.csv"] = _csv_bytes(
        "period,enterprise,event,value",
        ([str(e.period), e.enterprise, e.event, format_float(e.value)]
         for e in trajectory.events))
    files[f"{prefix}/indicators.csv"] = _csv_bytes(
        "enterprise,variant,g_scalar,break_periods",
        ([ent_id, ind.variant, format_float(ind.scalar),
          ";".join(str(b) for b in ind.break_periods)]
         for ent_id, ind in analysis.indicators.items()))
    files[f"{prefix}/metadata.csv"] = _csv_bytes(
        "key,value",
        [["criterion_total", format_float(trajectory.criterion)],
         ["seed", str(trajectory.seed)]]
        + [[f"criterion_{ent_id}", format_float(traj.criterion)]
           for ent_id, traj in trajectory.enterprises.items()])
    return files


def _damage_files(report) -> dict[str, bytes]:
    files = {
        "damage_report.csv": _csv_bytes(
            "metric,value",
            [["baseline_grp_bln", format_float(report.baseline_grp_bln)],
             ["sanctions_grp_bln", format_float(report.sanctions_grp_bln)],
             ["percent_loss", format_float(report.percent_loss)]]),
        "damage_indicators.csv": _csv_bytes(
            "enterprise,g_baseline,g_sanctions,g_drop_pct",
            ([ent, format_float(gb), format_float(gs), format_float(drop)]
             for ent, gb, gs, drop in report.enterprise_indicators)),
    }
    text = io.StringIO()
    text.write("Damage assessment: baseline vs sanctions\n")
    text.write("=========================================\n")
    text.write(f"Cumulative GRP: {report.baseline_grp_bln:.3f} bln rubles baseline, "
               f"{report.sanctions_grp_bln:.3f} bln under sanctions\n")
    text.write(f"Loss: {report.percent_loss:.2f}%\n")
    text.write("Integral indicator by enterprise:\n")
    for ent, g_base, g_sanc, drop in report.enterprise_indicators:
        text.write(f"  {ent}: {g_base:.1f} -> {g_sanc:.1f} (drop {drop:.1f}%)\n")
    if report.defaults:
        text.write("Defaults:\n")
        for ent, period in report.defaults:
            text.write(f"  {ent}: technical default at period {period}\n")
    else:
        text.write("Defaults: none\n")
    files["damage_report.txt"] = text.getvalue().encode("utf-8")
    return files


def _measure_files(effects) -> dict[str, bytes]:
    files = {"measures.csv": _csv_bytes(
        "measure,delta,annual_grp_change_pct,grp_change_bln",
        ([e.measure_id, format_float(e.delta),
          format_float(e.annual_grp_change_pct), format_float(e.grp_change_bln)]
         for e in effects))}
    text = io.StringIO()
    text.write("One-at-a-time measure effects on zone GRP\n")
    text.write("==========================================\n")
    for e in effects:
        text.write(f"  {e.measure_id:<4} {e.delta:+.0%}: "
                   f"{e.annual_grp_change_pct:+.3f}%/yr "
                   f"({e.grp_change_bln:+.4f} bln over the horizon)\n")
    files["measures.txt"] = text.getvalue().encode("utf-8")
    return files


# ---------------------------------------------------------------------------
# Output tree
# ---------------------------------------------------------------------------

class ScenarioIOError(OSError):
    """Output files cannot be written."""


def write_outputs(results: Mapping[str, bytes], directory: str | Path,
                  scenario: Scenario | None = None) -> tuple[ManifestEntry, ...]:
    """Write result files plus the resolved config, then the manifest.

    Returns the manifest entries (sorted by path); manifest.csv itself is
    not listed.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = dict(results)
    if scenario is not None:
        files["resolved_config.ini"] = render_resolved(scenario).encode("utf-8")
    entries = []
    for rel_path in sorted(files):
        content = files[rel_path]
        target = directory / rel_path
        target.parent.mkdir(parents=True, exist_ok=True)
        try:
            target.write_bytes(content)
        except OSError as exc:
            raise ScenarioIOError(f"cannot write {target}: {exc}") from None
        entries.append(ManifestEntry(
            path=rel_path, sha256=hashlib.sha256(content).hexdigest(),
            size=len(content)))
    manifest_bytes = _csv_bytes(
        "path,sha256,bytes",
        ([e.path, e.sha256, str(e.size)] for e in entries))
    (directory / "manifest.csv").write_bytes(manifest_bytes)
    return tuple(entries)


def run_pipeline(scenario: Scenario, mode: str,
                 out_dir: str | Path | None = None) -> PipelineResult:
    """Execute one pipeline mode and materialize its output tree.

    baseline / sanctions: one run (regimes off / on) with trajectories,
    correlation surfaces and indicator series.  compare: both runs plus
    the damage report.  measures: the one-at-a-time effect table over
    u1..u9 and the configured disturbance channels.
    """
    if mode not in MODES:
        raise ValidationError([f"unknown mode {mode!r}; choose from {', '.join(MODES)}"])
    directory = Path(out_dir) if out_dir is not None else Path(scenario.out_dir)

    files: dict[str, bytes] = {}
    analyses: dict[str, RunAnalysis] = {}
    measures: tuple[MeasureEffect, ...] = ()

    if mode in ("baseline", "compare"):
        analyses["baseline"] = run_scenario(scenario, with_regimes=False)
        files.update(_run_files("baseline", analyses["baseline"]))
    if mode in ("sanctions", "compare"):
        analyses["sanctions"] = run_scenario(scenario, with_regimes=True)
        files.update(_run_files("sanctions", analyses["sanctions"]))
    if mode == "compare":
        report = damage_assessment(
            analyses["baseline"].trajectory, analyses["sanctions"].trajectory,
            {k: v.scalar for k, v in analyses["baseline"].indicators.items()},
            {k: v.scalar for k, v in analyses["sanctions"].indicators.items()})
        files.update(_damage_files(report))
    if mode == "measures":
        effects = []
        for measure_id in CONTROL_IDS:
            effects.append(evaluate_measure(
                scenario.zone, scenario.grid, scenario.controls,
                scenario.disturbances, measure_id, scenario.measure_delta,
                policy=scenario.policy, seed=scenario.seed))
        for channel in scenario.measure_channels:
            effects.append(disturbance_sensitivity(
                scenario.zone, scenario.grid, scenario.controls,
                scenario.disturbances, channel, scenario.measure_delta,
                policy=scenario.policy, seed=scenario.seed))
        measures = tuple(effects)
        files.update(_measure_files(measures))

    manifest = write_outputs(files, directory, scenario=scenario)
    return PipelineResult(mode=mode, out_dir=directory, manifest=manifest,
                          analyses=analyses, measures=measures)
