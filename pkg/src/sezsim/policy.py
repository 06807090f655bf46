"""One-at-a-time policy evaluation and sanctions damage assessment.

Each measure (control lever u1..u9 or disturbance channel v1..v10) is
perturbed by a relative delta while everything else stays bitwise equal
to the baseline; the effect on zone GRP is reported as the mean annual
percentage change and as the cumulative absolute change.  The damage
report compares a baseline run against a sanctioned run of the same
scenario.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .core import (
    ControlSchedule,
    ControlVector,
    DisturbanceSchedule,
    DisturbanceVector,
    TimeGrid,
    ValidationError,
    Zone,
    CONTROL_IDS,
    DISTURBANCE_IDS,
)
from .dynamics import PlanningPolicy, Trajectory, simulate
from .sanctions import SanctionsRegime

# thousand rubles -> billions of rubles
THOUSAND_TO_BILLION = 1e-6

_CONTROL_FIELDS = dict(zip(CONTROL_IDS, (
    "profit_tax_regional", "profit_tax_consolidated", "transport_tax",
    "property_tax", "electricity_price", "transport_tariff", "social_rate",
    "land_rent", "forest_rent")))
_DISTURBANCE_FIELDS = dict(zip(DISTURBANCE_IDS, (
    "resource_prices", "wage_growth", "owner_investment", "innovation",
    "material_flow", "logistics", "labor", "technology_prices", "inflation",
    "dollar_rate")))


@dataclass(frozen=True)
class MeasureEffect:
    """GRP response to one perturbed measure, all else equal."""

    measure_id: str
    delta: float
    annual_grp_change_pct: float
    grp_change_bln: float
    baseline_grp_bln: float


@dataclass(frozen=True)
class DamageReport:
    """Baseline vs sanctions comparison over the full horizon."""

    baseline_grp_bln: float
    sanctions_grp_bln: float
    percent_loss: float
    enterprise_indicators: tuple[tuple[str, float, float, float], ...]
    defaults: tuple[tuple[str, int], ...]


def _scale_control(vector: ControlVector, measure_id: str, factor: float) -> ControlVector:
    field_name = _CONTROL_FIELDS[measure_id]
    return replace(vector, **{field_name: getattr(vector, field_name) * factor})


def _scale_disturbance(vector: DisturbanceVector, channel: str,
                       factor: float) -> DisturbanceVector:
    field_name = _DISTURBANCE_FIELDS[channel]
    return replace(vector, **{field_name: getattr(vector, field_name) * factor})


def perturb_controls(controls: ControlSchedule, measure_id: str,
                     delta: float) -> ControlSchedule:
    """Scale one control component by (1 + delta) in the default vector and
    every override; all other components are untouched."""
    if measure_id not in _CONTROL_FIELDS:
        raise ValidationError([f"unknown control measure {measure_id!r}"])
    factor = 1.0 + delta
    return ControlSchedule(
        default=_scale_control(controls.default, measure_id, factor),
        overrides={t: _scale_control(v, measure_id, factor)
                   for t, v in controls.overrides.items()})


def perturb_disturbances(disturbances: DisturbanceSchedule, channel: str,
                         delta: float) -> DisturbanceSchedule:
    if channel not in _DISTURBANCE_FIELDS:
        raise ValidationError([f"unknown disturbance channel {channel!r}"])
    factor = 1.0 + delta
    return DisturbanceSchedule(
        default=_scale_disturbance(disturbances.default, channel, factor),
        overrides={t: _scale_disturbance(v, channel, factor)
                   for t, v in disturbances.overrides.items()},
        noise=disturbances.noise)


def annual_grp_change_pct(baseline_grp: np.ndarray, perturbed_grp: np.ndarray) -> float:
    """Mean over whole years of the year-total percentage difference."""
    t_max = baseline_grp.shape[0]
    years = t_max // 12
    if years < 1:
        raise ValidationError([f"need at least 12 periods for an annual change, got {t_max}"])
    changes = []
    for year in range(years):
        sl = slice(12 * year, 12 * (year + 1))
        base = float(np.sum(baseline_grp[sl]))
        pert = float(np.sum(perturbed_grp[sl]))
        if base == 0.0:
            raise ValidationError([f"baseline GRP of year {year + 1} is zero"])
        changes.append((pert - base) / base * 100.0)
    return float(np.mean(changes))


def _effect(measure_id: str, delta: float, baseline: Trajectory,
            perturbed: Trajectory) -> MeasureEffect:
    base_cum = float(np.sum(baseline.zone_grp))
    pert_cum = float(np.sum(perturbed.zone_grp))
    if delta == 0.0:
        annual = 0.0  # identical inputs by construction
    else:
        annual = annual_grp_change_pct(baseline.zone_grp, perturbed.zone_grp)
    return MeasureEffect(
        measure_id=measure_id,
        delta=delta,
        annual_grp_change_pct=annual,
        grp_change_bln=(pert_cum - base_cum) * THOUSAND_TO_BILLION,
        baseline_grp_bln=base_cum * THOUSAND_TO_BILLION)


def evaluate_measure(zone: Zone, grid: TimeGrid, controls: ControlSchedule,
                     disturbances: DisturbanceSchedule, measure_id: str,
                     delta: float, policy: PlanningPolicy | None = None,
                     seed: int = 0,
                     regimes: Sequence[SanctionsRegime] = ()) -> MeasureEffect:
    """Effect of scaling control ``measure_id`` by (1 + delta) on zone GRP."""
    baseline = simulate(zone, grid, controls, disturbances, regimes, policy, seed)
    perturbed_controls = perturb_controls(controls, measure_id, delta)
    perturbed = simulate(zone, grid, perturbed_controls, disturbances, regimes,
                         policy, seed)
    return _effect(measure_id, delta, baseline, perturbed)


def disturbance_sensitivity(zone: Zone, grid: TimeGrid, controls: ControlSchedule,
                            disturbances: DisturbanceSchedule, channel: str,
                            delta: float, policy: PlanningPolicy | None = None,
                            seed: int = 0,
                            regimes: Sequence[SanctionsRegime] = ()) -> MeasureEffect:
    """Effect of scaling disturbance ``channel`` by (1 + delta) on zone GRP."""
    baseline = simulate(zone, grid, controls, disturbances, regimes, policy, seed)
    perturbed_dist = perturb_disturbances(disturbances, channel, delta)
    perturbed = simulate(zone, grid, controls, perturbed_dist, regimes, policy, seed)
    return _effect(channel, delta, baseline, perturbed)


def damage_assessment(baseline: Trajectory, sanctioned: Trajectory,
                      baseline_g: Mapping[str, float],
                      sanctioned_g: Mapping[str, float]) -> DamageReport:
    """Cumulative GRP loss and integral-indicator drop, baseline vs sanctions."""
    if baseline.grid != sanctioned.grid:
        raise ValidationError(
            [f"trajectories cover different grids: {baseline.grid.t_max} vs "
             f"{sanctioned.grid.t_max} periods"])
    if set(baseline.enterprises) != set(sanctioned.enterprises):
        raise ValidationError(["trajectories cover different enterprise sets"])

    base_cum = float(np.sum(baseline.zone_grp)) * THOUSAND_TO_BILLION
    sanc_cum = float(np.sum(sanctioned.zone_grp)) * THOUSAND_TO_BILLION
    if base_cum == 0.0:
        raise ValidationError(["baseline cumulative GRP is zero"])
    percent_loss = (base_cum - sanc_cum) / base_cum * 100.0

    indicators = []
    for ent_id in baseline.enterprises:
        g_base = float(baseline_g[ent_id])
        g_sanc = float(sanctioned_g[ent_id])
        drop_pct = (g_base - g_sanc) / g_base * 100.0 if g_base != 0.0 else 0.0
        indicators.append((ent_id, g_base, g_sanc, drop_pct))

    defaults = tuple(
        (event.enterprise, event.period)
        for event in sanctioned.events if event.event == "technical_default")

    return DamageReport(
        baseline_grp_bln=base_cum,
        sanctions_grp_bln=sanc_cum,
        percent_loss=percent_loss,
        enterprise_indicators=tuple(indicators),
        defaults=defaults)
