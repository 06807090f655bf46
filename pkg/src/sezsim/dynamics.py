"""State evolution, observation and planning for zone enterprises.

The recursion is x(t) = A x(t-1) + B u(t) + E v(t), followed by the
regime effect on export-revenue components when a sanctions regime is
active; observations are y(t) = H x(t) with row 0 the value-added (GRP)
estimate.  Planning propagates the same model forward from x(t-l), so the
plan equals the fact whenever the planning error is zero and no regime
acts inside the window.

Periods are 1-based (t = 1..t_max); x(0) is the configured initial state
and stored column k of any trajectory array holds period t = k + 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .core import (
    ControlSchedule,
    ControlVector,
    DisturbanceSchedule,
    DisturbanceVector,
    Enterprise,
    ParameterMatrix,
    SimulationError,
    SystemMatrices,
    TimeGrid,
    ValidationError,
    Zone,
    convert_disturbance_raw,
    schedule_periods_outside,
    validate_zone,
    DEFAULT_SPECTRAL_DELTA,
    DISTURBANCE_IDS,
    N_CONTROLS,
    N_DISTURBANCES,
)
from .sanctions import DistressState, RegimeEffect, SanctionsRegime, update_distress


class InsufficientHistoryError(ValueError):
    """Planning requested for a period not covered by the available lagged history."""


@dataclass(frozen=True)
class PlanningPolicy:
    """Lagged model-propagation planning.

    The plan for period t is the model forecast from the realized state
    at t - lag, with the per-period error epsilon added at each forecast
    step.  epsilon maps a period to either a scalar (applied to every
    parameter) or a full error vector; unlisted periods have zero error.
    """

    lag: int = 1
    epsilon: Mapping[int, float | tuple[float, ...]] = field(default_factory=dict)
    regulation: str = "propagate-model"

    def __post_init__(self):
        problems = []
        if not isinstance(self.lag, int) or self.lag < 1:
            problems.append(f"planning lag must be an integer >= 1, got {self.lag!r}")
        if self.regulation != "propagate-model":
            problems.append(f"unsupported planning regulation {self.regulation!r}")
        normalized: dict[int, float | tuple[float, ...]] = {}
        for t, value in dict(self.epsilon).items():
            if np.isscalar(value):
                value = float(value)
                if not np.isfinite(value):
                    problems.append(f"epsilon at period {t} must be finite")
                normalized[int(t)] = value
            else:
                vec = tuple(float(v) for v in value)
                if not all(np.isfinite(v) for v in vec):
                    problems.append(f"epsilon at period {t} must be finite")
                normalized[int(t)] = vec
        if problems:
            raise ValidationError(problems)
        object.__setattr__(self, "epsilon", normalized)

    def epsilon_at(self, t: int, n: int) -> np.ndarray | None:
        """Error vector for period t, or None when zero."""
        value = self.epsilon.get(t)
        if value is None:
            return None
        if isinstance(value, float):
            return np.full(n, value)
        if len(value) != n:
            raise ValidationError(
                [f"epsilon at period {t} has {len(value)} entries, state has {n}"])
        return np.array(value)


@dataclass(frozen=True)
class Event:
    """One entry of the machine-readable event log."""

    period: int
    enterprise: str
    event: str
    value: float


@dataclass(frozen=True)
class EnterpriseTrajectory:
    """Full per-enterprise record of one simulation run."""

    enterprise_id: str
    parameter_names: tuple[str, ...]
    realized: ParameterMatrix
    plan: np.ndarray
    observations: np.ndarray
    cash: np.ndarray
    warehouse: np.ndarray
    debt: np.ndarray
    production: np.ndarray
    disturbances_used: np.ndarray
    distress: DistressState
    criterion: float

    def __post_init__(self):
        for name in ("plan", "observations", "cash", "warehouse", "debt",
                     "production", "disturbances_used"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.plan.shape != self.realized.values.shape:
            raise ValidationError(
                [f"{self.enterprise_id}: plan matrix shape {self.plan.shape} "
                 f"must match realized {self.realized.values.shape}"])

    @property
    def grp(self) -> np.ndarray:
        """Value-added observation series (first H row)."""
        return self.observations[0]

    @property
    def t_max(self) -> int:
        return self.realized.t_max


@dataclass(frozen=True)
class Trajectory:
    """Zone-level result: per-enterprise trajectories plus aggregates."""

    grid: TimeGrid
    enterprises: Mapping[str, EnterpriseTrajectory]
    zone_grp: np.ndarray
    criterion: float
    events: tuple[Event, ...]
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "enterprises", dict(self.enterprises))
        object.__setattr__(self, "events", tuple(self.events))
        arr = np.asarray(self.zone_grp, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "zone_grp", arr)

    def enterprise(self, enterprise_id: str) -> EnterpriseTrajectory:
        try:
            return self.enterprises[enterprise_id]
        except KeyError:
            raise KeyError(f"unknown enterprise {enterprise_id!r}") from None


def _control_array(u) -> np.ndarray:
    if isinstance(u, ControlVector):
        return u.to_array()
    arr = np.asarray(u, dtype=float)
    if arr.shape != (N_CONTROLS,):
        raise ValidationError([f"control vector must have {N_CONTROLS} components, got {arr.shape}"])
    return arr


def _disturbance_array(v) -> np.ndarray:
    """Model-space disturbance vector; raw arrays are assumed converted."""
    if isinstance(v, DisturbanceVector):
        return v.to_model_array()
    arr = np.asarray(v, dtype=float)
    if arr.shape != (N_DISTURBANCES,):
        raise ValidationError([f"disturbance vector must have {N_DISTURBANCES} components, got {arr.shape}"])
    return arr


def _flow(b: np.ndarray, u: np.ndarray, e: np.ndarray, v: np.ndarray) -> np.ndarray:
    return b @ u + e @ v


def step(x_prev: np.ndarray, mats: SystemMatrices, u, v, *,
         t: int | None = None, regime_effect: RegimeEffect | None = None) -> np.ndarray:
    """One period of the state recursion.

    Returns A x_prev + B u + E v with the regime effect applied to the
    export-revenue components afterwards (identity when no regime is
    active).  u may be a ControlVector or a 9-array; v a DisturbanceVector
    (annual rates converted) or a model-space 10-array.
    """
    x_prev = np.asarray(x_prev, dtype=float)
    u_arr = _control_array(u)
    v_arr = _disturbance_array(v)
    a = mats.a_at(t)
    if x_prev.shape != (a.shape[0],):
        raise ValidationError(
            [f"state vector shape {x_prev.shape} does not match A {a.shape}"])
    x_next = a @ x_prev + _flow(mats.b_at(t), u_arr, mats.e_at(t), v_arr)
    if not np.all(np.isfinite(x_next)):
        raise SimulationError("state overflowed to a non-finite value", period=t)
    if regime_effect is not None:
        x_next, _ = regime_effect.apply(x_next)
    return x_next


def observe(h: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Observation y = H x; row 0 is the GRP (value added) estimate."""
    h = np.asarray(h, dtype=float)
    x = np.asarray(x, dtype=float)
    if h.ndim != 2 or x.shape != (h.shape[1],):
        raise ValidationError(
            [f"observation matrix {h.shape} incompatible with state {x.shape}"])
    return h @ x


def _plan_from_arrays(enterprise: Enterprise, realized_values: np.ndarray,
                      disturbances_used: np.ndarray, controls: ControlSchedule,
                      policy: PlanningPolicy, t: int) -> np.ndarray:
    lag = policy.lag
    if t <= lag:
        raise InsufficientHistoryError(
            f"cannot plan period {t} with lag {lag}: insufficient history")
    t_max = realized_values.shape[1]
    if t > t_max:
        raise InsufficientHistoryError(
            f"cannot plan period {t}: history covers only {t_max} periods")
    mats = enterprise.matrices
    x = np.array(realized_values[:, t - lag - 1])
    for s in range(t - lag + 1, t + 1):
        u_arr = controls.at(s).to_array()
        v_arr = disturbances_used[:, s - 1]
        x = mats.a_at(s) @ x + _flow(mats.b_at(s), u_arr, mats.e_at(s), v_arr)
        if not np.all(np.isfinite(x)):
            raise SimulationError("plan forecast overflowed", period=s,
                                  enterprise=enterprise.id)
        eps = policy.epsilon_at(s, enterprise.n)
        if eps is not None:
            x = x + eps
    return x


def plan(enterprise: Enterprise, history: EnterpriseTrajectory,
         controls: ControlSchedule, policy: PlanningPolicy, t: int) -> np.ndarray:
    """Planned state x*(t): the model forecast from the realized x(t - lag).

    The forecast replays the recorded disturbances and scheduled controls
    step by step, ignoring any regime, and adds the policy error at each
    step; with zero error and no regime active in (t - lag, t] it
    reproduces the realized state exactly.
    """
    return _plan_from_arrays(enterprise, history.realized.values,
                             history.disturbances_used, controls, policy, t)


def _disturbance_model_matrix(disturbances: DisturbanceSchedule, grid: TimeGrid,
                              rng: np.random.Generator) -> np.ndarray:
    """(10, t_max) model-space disturbances, noise drawn in channel order."""
    raw = np.empty((N_DISTURBANCES, grid.t_max))
    for t in grid.periods():
        raw[:, t - 1] = disturbances.at(t).to_raw_array()
    for idx, channel in enumerate(DISTURBANCE_IDS):
        std = disturbances.noise.get(channel, 0.0)
        if std > 0.0:
            raw[idx, :] += std * rng.standard_normal(grid.t_max)
    out = np.empty_like(raw)
    for t in range(grid.t_max):
        out[:, t] = convert_disturbance_raw(raw[:, t])
    return out


def _select_regime(regimes: Sequence[SanctionsRegime],
                   enterprise_id: str) -> SanctionsRegime | None:
    matches = [r for r in regimes if r.applies(enterprise_id)]
    if len(matches) > 1:
        raise ValidationError(
            [f"enterprise {enterprise_id!r} is targeted by {len(matches)} regimes; "
             "at most one is supported"])
    return matches[0] if matches else None


def simulate(zone: Zone, grid: TimeGrid, controls: ControlSchedule,
             disturbances: DisturbanceSchedule,
             regimes: Sequence[SanctionsRegime] = (),
             policy: PlanningPolicy | None = None, seed: int = 0, *,
             spectral_delta: float = DEFAULT_SPECTRAL_DELTA) -> Trajectory:
    """Run the zone over the full grid and return complete trajectories.

    Deterministic for a fixed seed; the seed only drives disturbance
    channels with configured noise.  Enterprises are independent except
    for the zone-level GRP aggregation computed afterwards.
    """
    violations = validate_zone(zone, grid, spectral_delta=spectral_delta)
    violations += [f"controls reference period {t} outside the grid"
                   for t in schedule_periods_outside(controls, grid)]
    violations += [f"disturbances reference period {t} outside the grid"
                   for t in schedule_periods_outside(disturbances, grid)]
    for regime in regimes:
        if not grid.contains(regime.onset):
            violations.append(f"regime onset {regime.onset} outside the grid")
    if policy is None:
        policy = PlanningPolicy()
    if policy.lag >= grid.t_max:
        violations.append(f"planning lag {policy.lag} must be < t_max {grid.t_max}")
    if violations:
        raise ValidationError(violations)

    rng = np.random.default_rng(seed)
    v_model = _disturbance_model_matrix(disturbances, grid, rng)
    t_max = grid.t_max

    u_arrays = {t: controls.at(t).to_array() for t in grid.periods()}

    results: dict[str, EnterpriseTrajectory] = {}
    events: list[Event] = []
    for ent in zone.enterprises:
        regime = _select_regime(regimes, ent.id)
        mats = ent.matrices
        n = ent.n
        revenue_rows = [int(i) for i in ent.revenue_rows]
        cut_rows = [ent.row_index(name) for name in ent.distress_cut_rows]
        w_idx = ent.row_index(ent.warehouse_row) if ent.warehouse_row else None
        d_idx = ent.row_index(ent.debt_service_row) if ent.debt_service_row else None
        cash_weights = ent.cash_weights()
        factor = regime.distress_cut_factor if regime is not None else 1.0

        realized = np.empty((n, t_max))
        production = np.zeros(t_max)
        cash_series = np.empty(t_max)
        warehouse_series = np.empty(t_max)
        debt_series = np.empty(t_max)

        state = DistressState(cash=ent.cash0, assets=ent.assets0)
        x = np.array(ent.x0)
        state_cut_applied = False

        for t in grid.periods():
            flow = _flow(mats.b_at(t), u_arrays[t], mats.e_at(t), v_model[:, t - 1])
            x_prev = x
            if state.distress_active and cut_rows:
                if not state_cut_applied:
                    x_prev = x.copy()
                    x_prev[cut_rows] /= factor
                    state_cut_applied = True
                flow[cut_rows] /= factor
            raw = mats.a_at(t) @ x_prev + flow
            if not np.all(np.isfinite(raw)):
                raise SimulationError("state overflowed to a non-finite value",
                                      period=t, enterprise=ent.id)
            if revenue_rows:
                production[t - 1] = float(np.sum(raw[revenue_rows]))

            x_new = raw
            warehouse_inc = 0.0
            if regime is not None:
                effect = RegimeEffect(regime, t, ent.export_share,
                                      tuple(revenue_rows))
                x_new, warehouse_inc = effect.apply(raw)
                if warehouse_inc != 0.0 and w_idx is not None:
                    if x_new is raw:
                        x_new = raw.copy()
                    x_new[w_idx] = raw[w_idx] + warehouse_inc
                if d_idx is not None:
                    interest = state.debt * regime.monthly_borrow_rate()
                    if interest != 0.0 or x_new[d_idx] != 0.0:
                        if x_new is raw:
                            x_new = raw.copy()
                        x_new[d_idx] = interest

            cash_flow = float(cash_weights @ x_new)
            if regime is not None:
                before = state
                state = replace(state, warehouse=state.warehouse + warehouse_inc)
                state = update_distress(state, cash_flow, regime, t)
                borrowed = state.debt - before.debt
                if borrowed > 0.0:
                    events.append(Event(t, ent.id, "emergency_borrow", borrowed))
                if state.distress_active and not before.distress_active:
                    events.append(Event(t, ent.id, "distress_trigger",
                                        before.assets - state.assets))
                if state.defaulted_at is not None and before.defaulted_at is None:
                    events.append(Event(t, ent.id, "technical_default",
                                        float(state.consecutive_negative)))
            else:
                state = replace(state, cash=state.cash + cash_flow)

            realized[:, t - 1] = x_new
            cash_series[t - 1] = state.cash
            warehouse_series[t - 1] = state.warehouse
            debt_series[t - 1] = state.debt
            x = x_new

        if mats.h_overrides:
            observations = np.empty((mats.n_observations, t_max))
            for t in grid.periods():
                observations[:, t - 1] = mats.h_at(t) @ realized[:, t - 1]
        else:
            observations = mats.h @ realized

        plan_matrix = np.array(realized[:, :policy.lag])
        if policy.lag < t_max:
            plan_cols = np.empty((n, t_max - policy.lag))
            for t in range(policy.lag + 1, t_max + 1):
                plan_cols[:, t - policy.lag - 1] = _plan_from_arrays(
                    ent, realized, v_model, controls, policy, t)
            plan_matrix = np.hstack([plan_matrix, plan_cols])

        results[ent.id] = EnterpriseTrajectory(
            enterprise_id=ent.id,
            parameter_names=ent.parameter_names,
            realized=ParameterMatrix(ent.id, ent.parameter_names, realized),
            plan=plan_matrix,
            observations=observations,
            cash=cash_series,
            warehouse=warehouse_series,
            debt=debt_series,
            production=production,
            disturbances_used=v_model,
            distress=state,
            criterion=float(np.sum(realized)),
        )

    zone_grp = np.sum(np.stack([traj.grp for traj in results.values()]), axis=0)
    criterion = float(sum(traj.criterion for traj in results.values()))
    return Trajectory(grid=grid, enterprises=results, zone_grp=zone_grp,
                      criterion=criterion, events=tuple(events), seed=seed)
