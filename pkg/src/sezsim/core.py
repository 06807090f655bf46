"""Domain types for the zone simulator.

Holds the time grid, enterprises with their system matrices, the nine
state control levers, the ten exogenous disturbance channels, schedules
for both, and the per-enterprise parameter matrix.

Each type validates its *local* invariants at construction and is
immutable afterwards (arrays are stored read-only).  Consistency checks
that span objects -- matrix dimensions against the state vector,
spectral radius of the development matrix, id uniqueness -- live in
:func:`validate_zone`, which returns a report instead of raising so a
scenario can be diagnosed in one pass.

Units: all monetary quantities are thousand rubles per month internally;
reports convert to billions of rubles.  Periods are 1-based months.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

N_CONTROLS = 9
N_DISTURBANCES = 10

# Row kinds: revenue rows earn cash and may be export-exposed, cost rows
# burn cash, neutral rows are informational (stocks, mirrored flows).
KIND_REVENUE = "revenue"
KIND_COST = "cost"
KIND_NEUTRAL = "neutral"
ROW_KINDS = (KIND_REVENUE, KIND_COST, KIND_NEUTRAL)

# Tolerance on the spectral radius of the development matrix A: guards
# against explosive trajectories while allowing mild compounding rows.
DEFAULT_SPECTRAL_DELTA = 0.05

CONTROL_IDS = ("u1", "u2", "u3", "u4", "u5", "u6", "u7", "u8", "u9")
DISTURBANCE_IDS = ("v1", "v2", "v3", "v4", "v5", "v6", "v7", "v8", "v9", "v10")

# Disturbance channels quoted as annual rates; converted to compounded
# monthly rates before entering the dynamics (v2 wage growth, v9 inflation).
ANNUAL_RATE_CHANNELS = (1, 8)  # 0-based indices into the disturbance vector


class ValidationError(ValueError):
    """One or more structural invariants are violated."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class SimulationError(RuntimeError):
    """Numerical failure during simulation, tagged with period and enterprise."""

    def __init__(self, message: str, *, period: int | None = None,
                 enterprise: str | None = None):
        self.period = period
        self.enterprise = enterprise
        tag = []
        if enterprise is not None:
            tag.append(f"enterprise={enterprise}")
        if period is not None:
            tag.append(f"period={period}")
        suffix = f" ({', '.join(tag)})" if tag else ""
        super().__init__(message + suffix)


def monthly_rate(annual: float) -> float:
    """Compounded monthly equivalent of an annual rate.

    Satisfies (1 + r_m)**12 == 1 + r_a to floating precision.
    """
    return (1.0 + annual) ** (1.0 / 12.0) - 1.0


def _frozen_array(values, shape=None, name: str = "array") -> np.ndarray:
    arr = np.array(values, dtype=float)
    if shape is not None and arr.shape != shape:
        raise ValidationError([f"{name}: expected shape {shape}, got {arr.shape}"])
    if not np.all(np.isfinite(arr)):
        raise ValidationError([f"{name}: entries must be finite"])
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeGrid:
    """Monthly planning horizon, periods t = 1..t_max."""

    t_max: int

    def __post_init__(self):
        if not isinstance(self.t_max, int) or self.t_max < 2:
            raise ValidationError([f"t_max must be an integer >= 2, got {self.t_max!r}"])

    def periods(self) -> range:
        return range(1, self.t_max + 1)

    def contains(self, t: int) -> bool:
        return 1 <= t <= self.t_max


@dataclass(frozen=True)
class ControlVector:
    """The nine state levers, each in its natural unit.

    u1/u2 profit-tax rates (regional / consolidated), u3 transport tax,
    u4 property tax and u7 social-fund contribution are rates in [0, 1];
    u5 electricity price, u6 transport tariff/subsidy, u8 land rent and
    u9 forest rent are non-negative prices.
    """

    profit_tax_regional: float = 0.0    # u1
    profit_tax_consolidated: float = 0.0  # u2
    transport_tax: float = 0.0          # u3
    property_tax: float = 0.0           # u4
    electricity_price: float = 0.0      # u5
    transport_tariff: float = 0.0       # u6
    social_rate: float = 0.0            # u7
    land_rent: float = 0.0              # u8
    forest_rent: float = 0.0            # u9

    _RATE_FIELDS = ("profit_tax_regional", "profit_tax_consolidated",
                    "transport_tax", "property_tax", "social_rate")
    _PRICE_FIELDS = ("electricity_price", "transport_tariff", "land_rent",
                     "forest_rent")

    def __post_init__(self):
        problems = []
        for name in self._RATE_FIELDS:
            value = getattr(self, name)
            if not np.isfinite(value) or not 0.0 <= value <= 1.0:
                problems.append(f"control {name} must be a rate in [0, 1], got {value}")
        for name in self._PRICE_FIELDS:
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0.0:
                problems.append(f"control {name} must be >= 0, got {value}")
        if problems:
            raise ValidationError(problems)

    def to_array(self) -> np.ndarray:
        """Component order u1..u9."""
        return np.array([
            self.profit_tax_regional, self.profit_tax_consolidated,
            self.transport_tax, self.property_tax, self.electricity_price,
            self.transport_tariff, self.social_rate, self.land_rent,
            self.forest_rent,
        ])

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "ControlVector":
        vals = list(values)
        if len(vals) != N_CONTROLS:
            raise ValidationError([f"control vector needs {N_CONTROLS} components, got {len(vals)}"])
        return cls(*map(float, vals))


@dataclass(frozen=True)
class DisturbanceVector:
    """The ten exogenous channels acting on the enterprise state.

    v2 (wage growth) and v9 (inflation) are quoted per annum and converted
    to compounded monthly rates by :meth:`to_model_array`; v10 is the
    dollar exchange rate in rubles and must be positive.
    """

    resource_prices: float = 1.0     # v1, index
    wage_growth: float = 0.04        # v2, annual rate
    owner_investment: float = 0.0    # v3, thousand rubles/month
    innovation: float = 1.0          # v4, index
    material_flow: float = 1.0       # v5, index
    logistics: float = 1.0           # v6, index
    labor: float = 1.0               # v7, index
    technology_prices: float = 1.0   # v8, index
    inflation: float = 0.04          # v9, annual rate
    dollar_rate: float = 70.0        # v10, rubles per dollar

    def __post_init__(self):
        values = self.to_raw_array()
        if not np.all(np.isfinite(values)):
            raise ValidationError(["disturbance components must be finite"])
        if self.dollar_rate <= 0.0:
            raise ValidationError([f"dollar rate v10 must be > 0, got {self.dollar_rate}"])

    def to_raw_array(self) -> np.ndarray:
        """Component order v1..v10, annual rates unconverted."""
        return np.array([
            self.resource_prices, self.wage_growth, self.owner_investment,
            self.innovation, self.material_flow, self.logistics, self.labor,
            self.technology_prices, self.inflation, self.dollar_rate,
        ])

    def to_model_array(self) -> np.ndarray:
        return convert_disturbance_raw(self.to_raw_array())

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "DisturbanceVector":
        vals = list(values)
        if len(vals) != N_DISTURBANCES:
            raise ValidationError([f"disturbance vector needs {N_DISTURBANCES} components, got {len(vals)}"])
        return cls(*map(float, vals))


def convert_disturbance_raw(raw: np.ndarray) -> np.ndarray:
    """Raw v1..v10 values to model space: annual-rate channels become monthly."""
    out = np.array(raw, dtype=float)
    for idx in ANNUAL_RATE_CHANNELS:
        out[idx] = monthly_rate(out[idx])
    return out


@dataclass(frozen=True)
class SystemMatrices:
    """Per-enterprise dynamics operators, constant with per-period overrides.

    a : (n, n) development matrix (influence of parameters on each other)
    b : (n, 9) control influence
    e : (n, 10) disturbance embedding (which channel feeds which row)
    h : (K, n) observation weights; row 0 is the value-added (GRP) row,
        with signs matching row kinds (+ revenue, - cost)
    """

    a: np.ndarray
    b: np.ndarray
    e: np.ndarray
    h: np.ndarray
    a_overrides: Mapping[int, np.ndarray] = field(default_factory=dict)
    b_overrides: Mapping[int, np.ndarray] = field(default_factory=dict)
    e_overrides: Mapping[int, np.ndarray] = field(default_factory=dict)
    h_overrides: Mapping[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        a = _frozen_array(self.a, name="A")
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError([f"A must be square, got shape {a.shape}"])
        n = a.shape[0]
        b = _frozen_array(self.b, shape=(n, N_CONTROLS), name="B")
        e = _frozen_array(self.e, shape=(n, N_DISTURBANCES), name="E")
        h = _frozen_array(self.h, name="H")
        if h.ndim != 2 or h.shape[0] < 1 or h.shape[1] != n:
            raise ValidationError([f"H must be (K>=1, {n}), got shape {h.shape}"])
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "h", h)
        for attr, base in (("a_overrides", a), ("b_overrides", b),
                           ("e_overrides", e), ("h_overrides", h)):
            frozen = {}
            for period, mat in dict(getattr(self, attr)).items():
                frozen[int(period)] = _frozen_array(
                    mat, shape=base.shape, name=f"{attr}[{period}]")
            object.__setattr__(self, attr, frozen)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def n_observations(self) -> int:
        return self.h.shape[0]

    def a_at(self, t: int | None = None) -> np.ndarray:
        return self.a_overrides.get(t, self.a) if t is not None else self.a

    def b_at(self, t: int | None = None) -> np.ndarray:
        return self.b_overrides.get(t, self.b) if t is not None else self.b

    def e_at(self, t: int | None = None) -> np.ndarray:
        return self.e_overrides.get(t, self.e) if t is not None else self.e

    def h_at(self, t: int | None = None) -> np.ndarray:
        return self.h_overrides.get(t, self.h) if t is not None else self.h

    def __eq__(self, other) -> bool:
        if not isinstance(other, SystemMatrices):
            return NotImplemented
        def over_eq(x, y):
            return x.keys() == y.keys() and all(np.array_equal(x[k], y[k]) for k in x)
        return (np.array_equal(self.a, other.a) and np.array_equal(self.b, other.b)
                and np.array_equal(self.e, other.e) and np.array_equal(self.h, other.h)
                and over_eq(self.a_overrides, other.a_overrides)
                and over_eq(self.b_overrides, other.b_overrides)
                and over_eq(self.e_overrides, other.e_overrides)
                and over_eq(self.h_overrides, other.h_overrides))

    __hash__ = None


@dataclass(frozen=True)
class Enterprise:
    """A zone resident: named budget lines, initial state, dynamics operators.

    export_share is the fraction of every revenue row exposed to the
    export channel (and hence to a sanctions regime).  distress_cut_rows
    name the production/administrative funding lines that are divided by
    the regime's cut factor once distress triggers.  warehouse_row and
    debt_service_row, when set, name informational lines maintained by
    the simulator (unsold-inventory carrying value, emergency interest).
    """

    id: str
    parameter_names: tuple[str, ...]
    parameter_kinds: tuple[str, ...]
    x0: np.ndarray
    matrices: SystemMatrices
    export_share: float = 0.0
    cash0: float = 0.0
    assets0: float = 0.0
    distress_cut_rows: tuple[str, ...] = ()
    warehouse_row: str | None = None
    debt_service_row: str | None = None

    def __post_init__(self):
        problems = []
        names = tuple(self.parameter_names)
        kinds = tuple(self.parameter_kinds)
        object.__setattr__(self, "parameter_names", names)
        object.__setattr__(self, "parameter_kinds", kinds)
        object.__setattr__(self, "distress_cut_rows", tuple(self.distress_cut_rows))
        if not self.id:
            problems.append("enterprise id must be non-empty")
        if len(names) < 2:
            problems.append(f"{self.id}: needs at least 2 parameters, got {len(names)}")
        if len(set(names)) != len(names):
            problems.append(f"{self.id}: parameter names must be unique")
        if len(kinds) != len(names):
            problems.append(f"{self.id}: kinds ({len(kinds)}) must match parameters ({len(names)})")
        for kind in kinds:
            if kind not in ROW_KINDS:
                problems.append(f"{self.id}: unknown row kind {kind!r}")
        x0 = np.array(self.x0, dtype=float)
        if x0.ndim != 1 or x0.shape[0] != len(names):
            problems.append(f"{self.id}: x0 length {x0.shape} must match {len(names)} parameters")
        if not np.all(np.isfinite(x0)):
            problems.append(f"{self.id}: x0 must be finite")
        if not 0.0 <= self.export_share <= 1.0:
            problems.append(f"{self.id}: export_share must be in [0, 1], got {self.export_share}")
        name_set = set(names)
        for row in self.distress_cut_rows:
            if row not in name_set:
                problems.append(f"{self.id}: unknown distress-cut row {row!r}")
        for label, row in (("warehouse_row", self.warehouse_row),
                           ("debt_service_row", self.debt_service_row)):
            if row is not None and row not in name_set:
                problems.append(f"{self.id}: unknown {label} {row!r}")
        if problems:
            raise ValidationError(problems)
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)

    @property
    def n(self) -> int:
        return len(self.parameter_names)

    def row_index(self, name: str) -> int:
        try:
            return self.parameter_names.index(name)
        except ValueError:
            raise KeyError(f"{self.id}: unknown parameter {name!r}") from None

    def rows_of_kind(self, kind: str) -> np.ndarray:
        return np.array([i for i, k in enumerate(self.parameter_kinds) if k == kind],
                        dtype=int)

    @property
    def revenue_rows(self) -> np.ndarray:
        return self.rows_of_kind(KIND_REVENUE)

    @property
    def cost_rows(self) -> np.ndarray:
        return self.rows_of_kind(KIND_COST)

    def cash_weights(self) -> np.ndarray:
        """+1 on revenue rows, -1 on cost rows, 0 on neutral rows."""
        weights = np.zeros(self.n)
        weights[self.revenue_rows] = 1.0
        weights[self.cost_rows] = -1.0
        return weights

    def __eq__(self, other) -> bool:
        if not isinstance(other, Enterprise):
            return NotImplemented
        return (self.id == other.id
                and self.parameter_names == other.parameter_names
                and self.parameter_kinds == other.parameter_kinds
                and np.array_equal(self.x0, other.x0)
                and self.matrices == other.matrices
                and self.export_share == other.export_share
                and self.cash0 == other.cash0
                and self.assets0 == other.assets0
                and self.distress_cut_rows == other.distress_cut_rows
                and self.warehouse_row == other.warehouse_row
                and self.debt_service_row == other.debt_service_row)

    __hash__ = None


@dataclass(frozen=True)
class Zone:
    """The special economic zone: an ordered list of resident enterprises."""

    id: str
    enterprises: tuple[Enterprise, ...]

    def __post_init__(self):
        object.__setattr__(self, "enterprises", tuple(self.enterprises))
        if len(self.enterprises) < 1:
            raise ValidationError([f"zone {self.id!r} needs at least one enterprise"])

    def enterprise(self, enterprise_id: str) -> Enterprise:
        for ent in self.enterprises:
            if ent.id == enterprise_id:
                return ent
        raise KeyError(f"unknown enterprise {enterprise_id!r}")


@dataclass(frozen=True)
class ParameterMatrix:
    """n x t_max matrix of monthly budget-line values for one enterprise."""

    enterprise_id: str
    parameter_names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        names = tuple(self.parameter_names)
        object.__setattr__(self, "parameter_names", names)
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != len(names):
            raise ValidationError([
                f"{self.enterprise_id}: values must be ({len(names)}, t_max), got {values.shape}"])
        if values.shape[1] < 1:
            raise ValidationError([f"{self.enterprise_id}: needs at least one period"])
        if not np.all(np.isfinite(values)):
            raise ValidationError([f"{self.enterprise_id}: values must be finite"])
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def t_max(self) -> int:
        return self.values.shape[1]

    def column(self, t: int) -> np.ndarray:
        """Values at period t (1-based)."""
        if not 1 <= t <= self.t_max:
            raise IndexError(f"period {t} outside 1..{self.t_max}")
        return self.values[:, t - 1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParameterMatrix):
            return NotImplemented
        return (self.enterprise_id == other.enterprise_id
                and self.parameter_names == other.parameter_names
                and np.array_equal(self.values, other.values))

    __hash__ = None


@dataclass(frozen=True)
class ControlSchedule:
    """Time-indexed controls: a default vector plus per-period overrides."""

    default: ControlVector = field(default_factory=ControlVector)
    overrides: Mapping[int, ControlVector] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "overrides",
                           {int(t): v for t, v in dict(self.overrides).items()})

    def at(self, t: int) -> ControlVector:
        return self.overrides.get(t, self.default)

    def referenced_periods(self) -> tuple[int, ...]:
        return tuple(sorted(self.overrides))


@dataclass(frozen=True)
class DisturbanceSchedule:
    """Time-indexed disturbances with opt-in white noise per channel.

    noise maps a channel id ("v1".."v10") to the standard deviation of
    seeded additive noise applied to the raw channel value.
    """

    default: DisturbanceVector = field(default_factory=DisturbanceVector)
    overrides: Mapping[int, DisturbanceVector] = field(default_factory=dict)
    noise: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "overrides",
                           {int(t): v for t, v in dict(self.overrides).items()})
        noise = {}
        problems = []
        for channel, std in dict(self.noise).items():
            if channel not in DISTURBANCE_IDS:
                problems.append(f"unknown disturbance channel {channel!r}")
            elif std < 0:
                problems.append(f"noise std for {channel} must be >= 0, got {std}")
            else:
                noise[channel] = float(std)
        if problems:
            raise ValidationError(problems)
        object.__setattr__(self, "noise", noise)

    def at(self, t: int) -> DisturbanceVector:
        return self.overrides.get(t, self.default)

    def referenced_periods(self) -> tuple[int, ...]:
        return tuple(sorted(self.overrides))


def schedule_periods_outside(schedule, grid: TimeGrid) -> list[int]:
    """Periods referenced by a schedule that fall outside the grid."""
    return [t for t in schedule.referenced_periods() if not grid.contains(t)]


def spectral_radius(a: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(np.asarray(a, dtype=float)))))


def validate_zone(zone: Zone, grid: TimeGrid, *,
                  spectral_delta: float = DEFAULT_SPECTRAL_DELTA) -> list[str]:
    """Cross-object consistency report; an empty list means the zone is valid.

    Never mutates or raises: each violated invariant contributes one entry.
    """
    report: list[str] = []
    seen: set[str] = set()
    for ent in zone.enterprises:
        if ent.id in seen:
            report.append(f"duplicate enterprise id {ent.id!r}")
        seen.add(ent.id)

    for ent in zone.enterprises:
        mats = ent.matrices
        if mats.n != ent.n:
            report.append(
                f"{ent.id}: dimension mismatch between state ({ent.n} parameters) "
                f"and matrices (A is {mats.a.shape[0]}x{mats.a.shape[1]})")
            continue  # remaining checks assume consistent dimensions

        for t, label, mat in [(None, "A", mats.a)] + [
                (t, f"A@{t}", m) for t, m in sorted(mats.a_overrides.items())]:
            radius = spectral_radius(mat)
            if radius > 1.0 + spectral_delta:
                report.append(
                    f"{ent.id}: spectral radius of {label} is {radius:.6g}, "
                    f"exceeds 1 + {spectral_delta}")

        # GRP row signs must agree with row kinds: revenue contributes
        # non-negatively to value added, cost rows non-positively.
        grp = mats.h[0]
        for j, kind in enumerate(ent.parameter_kinds):
            if kind == KIND_REVENUE and grp[j] < 0:
                report.append(
                    f"{ent.id}: GRP observation weight on revenue row "
                    f"{ent.parameter_names[j]!r} must be >= 0, got {grp[j]}")
            elif kind == KIND_COST and grp[j] > 0:
                report.append(
                    f"{ent.id}: GRP observation weight on cost row "
                    f"{ent.parameter_names[j]!r} must be <= 0, got {grp[j]}")

        # Informational rows must have carry-only dynamics so that the
        # simulator's writes are the only source of their values.
        if ent.warehouse_row is not None:
            w = ent.row_index(ent.warehouse_row)
            row = mats.a[w].copy()
            diag = row[w]
            row[w] = 0.0
            if not (0.0 < diag <= 1.0) or np.any(row != 0.0):
                report.append(
                    f"{ent.id}: warehouse row {ent.warehouse_row!r} must be "
                    "carry-only (A self-weight in (0, 1], no cross terms)")
            if np.any(mats.b[w] != 0.0) or np.any(mats.e[w] != 0.0):
                report.append(
                    f"{ent.id}: warehouse row {ent.warehouse_row!r} must have "
                    "zero B and E rows")
        if ent.debt_service_row is not None:
            d = ent.row_index(ent.debt_service_row)
            if np.any(mats.a[d] != 0.0) or np.any(mats.b[d] != 0.0) or np.any(mats.e[d] != 0.0):
                report.append(
                    f"{ent.id}: debt-service row {ent.debt_service_row!r} must have "
                    "zero A, B and E rows")
    return report
