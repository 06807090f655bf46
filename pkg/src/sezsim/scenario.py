"""Scenario files: a sectioned key=value format with CSV matrix side-files.

The format is plain text for diffability and hand editing.  Sections:
[grid], [zone], one [enterprise:<id>] per resident, [controls],
[disturbances], optional [regime] blocks, [planning], [adaptometry] and
[run].  Matrices live in separate CSV files (header row of column
labels, one data row per matrix row) referenced from the enterprise
section; paths are resolved relative to the scenario file.

parse_scenario applies every documented default and validates the loaded
zone in one pass, raising a single error that lists all violations.  The
resolved configuration (defaults made explicit, matrix paths absolute)
can be rendered back and re-parsed into an identical Scenario.
"""

from __future__ import annotations

import configparser
import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .adaptometry import INDICATOR_VARIANTS
from .core import (
    ControlSchedule,
    ControlVector,
    DisturbanceSchedule,
    DisturbanceVector,
    Enterprise,
    SystemMatrices,
    TimeGrid,
    ValidationError,
    Zone,
    schedule_periods_outside,
    validate_zone,
    CONTROL_IDS,
    DEFAULT_SPECTRAL_DELTA,
    DISTURBANCE_IDS,
    N_CONTROLS,
    N_DISTURBANCES,
    ROW_KINDS,
)
from .dynamics import PlanningPolicy
from .sanctions import SanctionsRegime

DEFAULT_DROP_THRESHOLD = 0.3
DEFAULT_MEASURE_DELTA = 0.2

_MATRIX_KEYS = ("matrix_a", "matrix_b", "matrix_e", "matrix_h")


class ScenarioError(ValueError):
    """Scenario file cannot be parsed or fails validation."""

    def __init__(self, violations: Sequence[str], path: Path | None = None):
        self.violations = list(violations)
        self.path = path
        prefix = f"{path}: " if path is not None else ""
        super().__init__(prefix + "; ".join(self.violations))


def format_float(value: float) -> str:
    """Shortest decimal rendering that round-trips to the same binary value."""
    return repr(float(value))


@dataclass(frozen=True)
class AdaptometrySettings:
    variant: str = "total-abs"
    drop_threshold: float = DEFAULT_DROP_THRESHOLD
    selection: tuple[str, ...] | None = None

    def __post_init__(self):
        problems = []
        if self.variant not in INDICATOR_VARIANTS:
            problems.append(f"unknown adaptometry variant {self.variant!r}")
        if not 0.0 < self.drop_threshold < 1.0:
            problems.append(f"drop_threshold must be in (0, 1), got {self.drop_threshold}")
        if problems:
            raise ValidationError(problems)
        if self.selection is not None:
            object.__setattr__(self, "selection", tuple(self.selection))


@dataclass(frozen=True)
class Scenario:
    """A fully resolved run configuration."""

    grid: TimeGrid
    zone: Zone
    controls: ControlSchedule
    disturbances: DisturbanceSchedule
    regimes: tuple[SanctionsRegime, ...]
    policy: PlanningPolicy
    adaptometry: AdaptometrySettings
    seed: int = 0
    out_dir: str = "out"
    spectral_delta: float = DEFAULT_SPECTRAL_DELTA
    measure_delta: float = DEFAULT_MEASURE_DELTA
    measure_channels: tuple[str, ...] = ("v10",)
    # enterprise id -> matrix key -> absolute path of the CSV source
    matrix_sources: Mapping[str, Mapping[str, str]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "regimes", tuple(self.regimes))
        object.__setattr__(self, "measure_channels", tuple(self.measure_channels))
        object.__setattr__(
            self, "matrix_sources",
            {ent: dict(paths) for ent, paths in dict(self.matrix_sources).items()})


# ---------------------------------------------------------------------------
# Matrix CSV side-files
# ---------------------------------------------------------------------------

def load_matrix_csv(path: Path, column_labels: Sequence[str]) -> np.ndarray:
    """Read a matrix CSV; the header must spell the expected column labels."""
    if not path.exists():
        raise ScenarioError([f"matrix file not found: {path}"])
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ScenarioError([f"matrix file is empty: {path}"]) from None
        expected = list(column_labels)
        if [h.strip() for h in header] != expected:
            raise ScenarioError(
                [f"{path}: header {header} does not match expected columns {expected}"])
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(expected):
                raise ScenarioError(
                    [f"{path}:{line_no}: expected {len(expected)} values, got {len(row)}"])
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise ScenarioError([f"{path}:{line_no}: {exc}"]) from None
    if not rows:
        raise ScenarioError([f"{path}: no data rows"])
    return np.array(rows)


def save_matrix_csv(path: Path, column_labels: Sequence[str],
                    matrix: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", newline="\n", encoding="utf-8") as handle:
        handle.write(",".join(column_labels) + "\n")
        for row in matrix:
            handle.write(",".join(format_float(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _read_ini(path: Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",),
        interpolation=None, strict=True)
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle, source=str(path))
    except OSError as exc:
        raise ScenarioError([f"cannot read scenario file: {exc}"], path) from None
    except configparser.Error as exc:
        raise ScenarioError([f"parse error: {exc}"], path) from None
    return parser


class _SectionReader:
    """Typed access to one section, accumulating errors instead of raising."""

    def __init__(self, parser: configparser.ConfigParser, name: str,
                 errors: list[str]):
        self.name = name
        self.errors = errors
        self._data = dict(parser[name]) if parser.has_section(name) else {}
        self.present = parser.has_section(name)

    def consume(self, key: str, default: str | None = None) -> str | None:
        return self._data.pop(key, default)

    def leftover_keys(self) -> list[str]:
        return list(self._data)

    def _convert(self, key: str, raw: str, kind, label: str):
        try:
            return kind(raw)
        except (TypeError, ValueError):
            self.errors.append(f"[{self.name}] {key}: expected {label}, got {raw!r}")
            return None

    def get_int(self, key: str, default: int | None = None) -> int | None:
        raw = self.consume(key)
        if raw is None:
            return default
        return self._convert(key, raw, int, "an integer")

    def get_float(self, key: str, default: float | None = None) -> float | None:
        raw = self.consume(key)
        if raw is None:
            return default
        return self._convert(key, raw, float, "a number")

    def get_bool(self, key: str, default: bool) -> bool:
        raw = self.consume(key)
        if raw is None:
            return default
        lowered = raw.strip().lower()
        if lowered in ("true", "yes", "1", "on"):
            return True
        if lowered in ("false", "no", "0", "off"):
            return False
        self.errors.append(f"[{self.name}] {key}: expected true/false, got {raw!r}")
        return default

    def get_str(self, key: str, default: str | None = None) -> str | None:
        raw = self.consume(key)
        return raw.strip() if raw is not None else default

    def get_list(self, key: str, default: list[str] | None = None) -> list[str] | None:
        raw = self.consume(key)
        if raw is None:
            return default
        return [item.strip() for item in raw.split(",") if item.strip()]

    def get_floats(self, key: str, count: int | None = None,
                   default: list[float] | None = None) -> list[float] | None:
        raw = self.consume(key)
        if raw is None:
            return default
        parts = [item.strip() for item in raw.split(",") if item.strip()]
        values = []
        for part in parts:
            converted = self._convert(key, part, float, "a number")
            if converted is None:
                return None
            values.append(converted)
        if count is not None and len(values) != count:
            self.errors.append(
                f"[{self.name}] {key}: expected {count} values, got {len(values)}")
            return None
        return values


def _parse_enterprise(parser: configparser.ConfigParser, section: str,
                      base_dir: Path, errors: list[str]
                      ) -> tuple[Enterprise | None, dict[str, str]]:
    ent_id = section.split(":", 1)[1].strip()
    reader = _SectionReader(parser, section, errors)
    names = reader.get_list("parameters")
    if not names:
        errors.append(f"[{section}] parameters: required")
        return None, {}
    kinds = reader.get_list("kinds")
    if kinds is None or len(kinds) != len(names):
        errors.append(f"[{section}] kinds: must list one kind per parameter "
                      f"(one of {', '.join(ROW_KINDS)})")
        return None, {}
    x0 = reader.get_floats("x0", count=len(names))
    export_share = reader.get_float("export_share", 0.0)
    cash0 = reader.get_float("cash0", 0.0)
    assets0 = reader.get_float("assets0", 0.0)
    distress_cut = reader.get_list("distress_cut", [])
    warehouse_row = reader.get_str("warehouse_row")
    debt_row = reader.get_str("debt_service_row")

    column_labels = {"matrix_a": names, "matrix_b": list(CONTROL_IDS),
                     "matrix_e": list(DISTURBANCE_IDS), "matrix_h": names}
    sources: dict[str, str] = {}
    matrices: dict[str, np.ndarray] = {}
    overrides: dict[str, dict[int, np.ndarray]] = {k: {} for k in _MATRIX_KEYS}
    for key in _MATRIX_KEYS:
        rel = reader.get_str(key)
        if rel is None:
            errors.append(f"[{section}] {key}: required")
            continue
        path = (base_dir / rel).resolve() if not Path(rel).is_absolute() else Path(rel)
        sources[key] = str(path)
        try:
            matrices[key] = load_matrix_csv(path, column_labels[key])
        except ScenarioError as exc:
            errors.extend(exc.violations)
    for key in reader.leftover_keys():
        if "@" in key:
            base_key, _, period_raw = key.partition("@")
            if base_key not in _MATRIX_KEYS:
                errors.append(f"[{section}] unknown key {key!r}")
                continue
            try:
                period = int(period_raw)
            except ValueError:
                errors.append(f"[{section}] {key}: override period must be an integer")
                continue
            rel = reader.consume(key).strip()
            path = (base_dir / rel).resolve() if not Path(rel).is_absolute() else Path(rel)
            sources[key] = str(path)
            try:
                overrides[base_key][period] = load_matrix_csv(path, column_labels[base_key])
            except ScenarioError as exc:
                errors.extend(exc.violations)
        else:
            errors.append(f"[{section}] unknown key {key!r}")

    if len(matrices) != len(_MATRIX_KEYS) or x0 is None:
        return None, sources
    try:
        system = SystemMatrices(
            a=matrices["matrix_a"], b=matrices["matrix_b"],
            e=matrices["matrix_e"], h=matrices["matrix_h"],
            a_overrides=overrides["matrix_a"], b_overrides=overrides["matrix_b"],
            e_overrides=overrides["matrix_e"], h_overrides=overrides["matrix_h"])
        enterprise = Enterprise(
            id=ent_id, parameter_names=tuple(names), parameter_kinds=tuple(kinds),
            x0=np.array(x0), matrices=system, export_share=export_share,
            cash0=cash0, assets0=assets0, distress_cut_rows=tuple(distress_cut),
            warehouse_row=warehouse_row, debt_service_row=debt_row)
    except ValidationError as exc:
        errors.extend(exc.violations)
        return None, sources
    return enterprise, sources


def _parse_schedule_overrides(reader: _SectionReader, count: int,
                              build) -> dict[int, object]:
    overrides = {}
    for key in list(reader.leftover_keys()):
        if key == "default" or key.startswith("noise_"):
            continue
        try:
            period = int(key)
        except ValueError:
            reader.errors.append(f"[{reader.name}] unknown key {key!r}")
            reader.consume(key)
            continue
        values = reader.get_floats(key, count=count)
        if values is not None:
            try:
                overrides[period] = build(values)
            except ValidationError as exc:
                reader.errors.extend(
                    f"[{reader.name}] {key}: {v}" for v in exc.violations)
    return overrides


def _parse_regime(parser: configparser.ConfigParser, section: str,
                  errors: list[str]) -> SanctionsRegime | None:
    reader = _SectionReader(parser, section, errors)
    onset = reader.get_int("onset")
    if onset is None:
        errors.append(f"[{section}] onset: required")
        return None
    severity = reader.get_float("severity", 0.8)
    recovered = reader.get_float("recovered_fraction")
    if recovered is None and severity is not None:
        recovered = 1.0 - severity  # documented default: the unblocked share
    applies = reader.get_list("applies_to")
    kwargs = dict(
        onset=onset,
        severity=severity,
        recovery_months=reader.get_int("recovery_months", 3),
        recovered_fraction=recovered,
        borrow_premium=reader.get_float("borrow_premium", 0.07),
        base_rate=reader.get_float("base_rate", 0.12),
        default_horizon=reader.get_int("default_horizon", 12),
        distress_cut_factor=reader.get_float("distress_cut_factor", 5.0),
        asset_sale_fraction=reader.get_float("asset_sale_fraction", 0.0),
        warehouse_carry_cost=reader.get_float("warehouse_carry_cost", 0.0),
        instant_floor=reader.get_bool("instant_floor", False),
        applies_to=tuple(applies) if applies is not None else None)
    for key in reader.leftover_keys():
        errors.append(f"[{section}] unknown key {key!r}")
    if any(v is None for k, v in kwargs.items()
           if k not in ("recovered_fraction", "applies_to")):
        return None
    try:
        return SanctionsRegime(**kwargs)
    except ValidationError as exc:
        errors.extend(f"[{section}] {v}" for v in exc.violations)
        return None


def parse_scenario(path: str | Path) -> Scenario:
    """Load, default-fill and validate a scenario file."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError(["scenario file not found"], path)
    parser = _read_ini(path)
    base_dir = path.parent
    errors: list[str] = []

    grid_reader = _SectionReader(parser, "grid", errors)
    t_max = grid_reader.get_int("t_max")
    if t_max is None:
        errors.append("[grid] t_max: required")
    grid = None
    if t_max is not None:
        try:
            grid = TimeGrid(t_max)
        except ValidationError as exc:
            errors.extend(exc.violations)

    zone_reader = _SectionReader(parser, "zone", errors)
    zone_id = zone_reader.get_str("id", "zone")

    enterprises = []
    matrix_sources: dict[str, dict[str, str]] = {}
    regimes: list[SanctionsRegime] = []
    for section in parser.sections():
        if section.startswith("enterprise:"):
            enterprise, sources = _parse_enterprise(parser, section, base_dir, errors)
            if enterprise is not None:
                enterprises.append(enterprise)
                matrix_sources[enterprise.id] = sources
        elif section == "regime" or section.startswith("regime:"):
            regime = _parse_regime(parser, section, errors)
            if regime is not None:
                regimes.append(regime)
    if not enterprises:
        errors.append("no [enterprise:<id>] section found")

    controls_reader = _SectionReader(parser, "controls", errors)
    default_u = controls_reader.get_floats("default", count=N_CONTROLS)
    controls = ControlSchedule()
    try:
        default_vector = (ControlVector.from_array(default_u)
                          if default_u is not None else ControlVector())
        u_overrides = _parse_schedule_overrides(
            controls_reader, N_CONTROLS, ControlVector.from_array)
        controls = ControlSchedule(default=default_vector, overrides=u_overrides)
    except ValidationError as exc:
        errors.extend(f"[controls] {v}" for v in exc.violations)

    dist_reader = _SectionReader(parser, "disturbances", errors)
    default_v = dist_reader.get_floats("default", count=N_DISTURBANCES)
    noise = {}
    for channel in DISTURBANCE_IDS:
        std = dist_reader.get_float(f"noise_{channel}")
        if std is not None:
            noise[channel] = std
    disturbances = DisturbanceSchedule()
    try:
        default_dist = (DisturbanceVector.from_array(default_v)
                        if default_v is not None else DisturbanceVector())
        v_overrides = _parse_schedule_overrides(
            dist_reader, N_DISTURBANCES, DisturbanceVector.from_array)
        disturbances = DisturbanceSchedule(default=default_dist,
                                           overrides=v_overrides, noise=noise)
    except ValidationError as exc:
        errors.extend(f"[disturbances] {v}" for v in exc.violations)

    planning_reader = _SectionReader(parser, "planning", errors)
    lag = planning_reader.get_int("lag", 1)
    policy = PlanningPolicy()
    try:
        policy = PlanningPolicy(lag=lag if lag is not None else 1)
    except ValidationError as exc:
        errors.extend(f"[planning] {v}" for v in exc.violations)

    adapt_reader = _SectionReader(parser, "adaptometry", errors)
    variant = adapt_reader.get_str("variant", "total-abs")
    drop_threshold = adapt_reader.get_float("drop_threshold", DEFAULT_DROP_THRESHOLD)
    selection = adapt_reader.get_list("parameters")
    adaptometry = AdaptometrySettings()
    try:
        adaptometry = AdaptometrySettings(
            variant=variant, drop_threshold=drop_threshold,
            selection=tuple(selection) if selection is not None else None)
    except ValidationError as exc:
        errors.extend(f"[adaptometry] {v}" for v in exc.violations)

    run_reader = _SectionReader(parser, "run", errors)
    seed = run_reader.get_int("seed", 0)
    out_dir = run_reader.get_str("out_dir", "out")
    spectral_delta = run_reader.get_float("spectral_delta", DEFAULT_SPECTRAL_DELTA)
    measure_delta = run_reader.get_float("measure_delta", DEFAULT_MEASURE_DELTA)
    measure_channels = run_reader.get_list("measure_channels", ["v10"])
    for channel in measure_channels:
        if channel not in DISTURBANCE_IDS:
            errors.append(f"[run] measure_channels: unknown channel {channel!r}")

    if errors:
        raise ScenarioError(errors, path)

    zone = Zone(id=zone_id, enterprises=tuple(enterprises))
    violations = validate_zone(zone, grid, spectral_delta=spectral_delta)
    violations += [f"controls reference period {t} outside the grid"
                   for t in schedule_periods_outside(controls, grid)]
    violations += [f"disturbances reference period {t} outside the grid"
                   for t in schedule_periods_outside(disturbances, grid)]
    for regime in regimes:
        if not grid.contains(regime.onset):
            violations.append(f"regime onset {regime.onset} outside the grid")
        if regime.applies_to is not None:
            known = {ent.id for ent in enterprises}
            violations += [f"regime targets unknown enterprise {ent_id!r}"
                           for ent_id in regime.applies_to if ent_id not in known]
    if policy.lag >= grid.t_max:
        violations.append(f"planning lag {policy.lag} must be < t_max {grid.t_max}")
    if adaptometry.selection is not None:
        for ent in enterprises:
            for name in adaptometry.selection:
                if name not in ent.parameter_names:
                    violations.append(
                        f"adaptometry selection names unknown parameter {name!r} "
                        f"for enterprise {ent.id!r}")
    if violations:
        raise ScenarioError(violations, path)

    return Scenario(
        grid=grid, zone=zone, controls=controls, disturbances=disturbances,
        regimes=tuple(regimes), policy=policy, adaptometry=adaptometry,
        seed=seed, out_dir=out_dir, spectral_delta=spectral_delta,
        measure_delta=measure_delta, measure_channels=tuple(measure_channels),
        matrix_sources=matrix_sources)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _render_vector(values) -> str:
    return ", ".join(format_float(v) for v in values)


def render_resolved(scenario: Scenario) -> str:
    """Scenario text with every default explicit and matrix paths absolute.

    Parsing the rendered text yields a Scenario equal to the input.
    """
    out = io.StringIO()

    def section(name: str, items: list[tuple[str, str]]):
        out.write(f"[{name}]\n")
        for key, value in items:
            out.write(f"{key} = {value}\n")
        out.write("\n")

    section("grid", [("t_max", str(scenario.grid.t_max))])
    section("zone", [("id", scenario.zone.id)])

    for ent in scenario.zone.enterprises:
        sources = scenario.matrix_sources.get(ent.id, {})
        items = [
            ("parameters", ", ".join(ent.parameter_names)),
            ("kinds", ", ".join(ent.parameter_kinds)),
            ("x0", _render_vector(ent.x0)),
            ("export_share", format_float(ent.export_share)),
            ("cash0", format_float(ent.cash0)),
            ("assets0", format_float(ent.assets0)),
        ]
        if ent.distress_cut_rows:
            items.append(("distress_cut", ", ".join(ent.distress_cut_rows)))
        if ent.warehouse_row:
            items.append(("warehouse_row", ent.warehouse_row))
        if ent.debt_service_row:
            items.append(("debt_service_row", ent.debt_service_row))
        for key in sorted(sources):
            items.append((key, sources[key]))
        section(f"enterprise:{ent.id}", items)

    items = [("default", _render_vector(scenario.controls.default.to_array()))]
    for t in sorted(scenario.controls.overrides):
        items.append((str(t), _render_vector(scenario.controls.overrides[t].to_array())))
    section("controls", items)

    items = [("default", _render_vector(scenario.disturbances.default.to_raw_array()))]
    for t in sorted(scenario.disturbances.overrides):
        items.append((str(t),
                      _render_vector(scenario.disturbances.overrides[t].to_raw_array())))
    for channel in DISTURBANCE_IDS:
        if channel in scenario.disturbances.noise:
            items.append((f"noise_{channel}",
                          format_float(scenario.disturbances.noise[channel])))
    section("disturbances", items)

    for regime in scenario.regimes:
        items = [
            ("onset", str(regime.onset)),
            ("severity", format_float(regime.severity)),
            ("recovery_months", str(regime.recovery_months)),
            ("recovered_fraction", format_float(regime.recovered)),
            ("borrow_premium", format_float(regime.borrow_premium)),
            ("base_rate", format_float(regime.base_rate)),
            ("default_horizon", str(regime.default_horizon)),
            ("distress_cut_factor", format_float(regime.distress_cut_factor)),
            ("asset_sale_fraction", format_float(regime.asset_sale_fraction)),
            ("warehouse_carry_cost", format_float(regime.warehouse_carry_cost)),
            ("instant_floor", "true" if regime.instant_floor else "false"),
        ]
        if regime.applies_to is not None:
            items.append(("applies_to", ", ".join(regime.applies_to)))
        section("regime", items)

    section("planning", [("lag", str(scenario.policy.lag))])

    items = [("variant", scenario.adaptometry.variant),
             ("drop_threshold", format_float(scenario.adaptometry.drop_threshold))]
    if scenario.adaptometry.selection is not None:
        items.append(("parameters", ", ".join(scenario.adaptometry.selection)))
    section("adaptometry", items)

    section("run", [
        ("seed", str(scenario.seed)),
        ("out_dir", scenario.out_dir),
        ("spectral_delta", format_float(scenario.spectral_delta)),
        ("measure_delta", format_float(scenario.measure_delta)),
        ("measure_channels", ", ".join(scenario.measure_channels)),
    ])
    return out.getvalue()


def save_scenario(scenario: Scenario, directory: str | Path,
                  name: str = "scenario.ini") -> Path:
    """Write a relocatable scenario: matrices under matrices/, relative paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    matrix_dir = directory / "matrices"
    sources: dict[str, dict[str, str]] = {}
    for ent in scenario.zone.enterprises:
        mats = ent.matrices
        labels = {"matrix_a": ent.parameter_names, "matrix_b": CONTROL_IDS,
                  "matrix_e": DISTURBANCE_IDS, "matrix_h": ent.parameter_names}
        data = {"matrix_a": mats.a, "matrix_b": mats.b,
                "matrix_e": mats.e, "matrix_h": mats.h}
        per_ent = {}
        for key in _MATRIX_KEYS:
            suffix = key.split("_", 1)[1].upper()
            rel = f"matrices/{ent.id}.{suffix}.csv"
            save_matrix_csv(directory / rel, labels[key], data[key])
            per_ent[key] = rel
        for key, overrides in (("matrix_a", mats.a_overrides),
                               ("matrix_b", mats.b_overrides),
                               ("matrix_e", mats.e_overrides),
                               ("matrix_h", mats.h_overrides)):
            suffix = key.split("_", 1)[1].upper()
            for period, mat in sorted(overrides.items()):
                rel = f"matrices/{ent.id}.{suffix}{period}.csv"
                save_matrix_csv(directory / rel, labels[key], mat)
                per_ent[f"{key}@{period}"] = rel
        sources[ent.id] = per_ent

    relocatable = Scenario(
        grid=scenario.grid, zone=scenario.zone, controls=scenario.controls,
        disturbances=scenario.disturbances, regimes=scenario.regimes,
        policy=scenario.policy, adaptometry=scenario.adaptometry,
        seed=scenario.seed, out_dir=scenario.out_dir,
        spectral_delta=scenario.spectral_delta,
        measure_delta=scenario.measure_delta,
        measure_channels=scenario.measure_channels, matrix_sources=sources)
    target = directory / name
    with open(target, "w", newline="\n", encoding="utf-8") as handle:
        handle.write(render_resolved(relocatable))
    return target
