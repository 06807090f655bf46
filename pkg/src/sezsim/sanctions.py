"""Export-restriction regime and the distress mechanics it triggers.

A regime blocks the export channel of every revenue row at an onset
period, lets sales recover along a linear ramp, and ships unsold output
to the warehouse.  The cash consequences are threaded through an
immutable :class:`DistressState`: emergency borrowing at a premium rate
covers negative cash, a sustained negative streak activates distress
(funding cuts, one-off asset sale) and, past the default horizon, a
technical default.

All functions here are pure; the simulation loop owns state threading.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import ValidationError, monthly_rate


@dataclass(frozen=True)
class SanctionsRegime:
    """An export restriction applied from ``onset`` onwards.

    severity is the fraction of the export flow blocked in steady state;
    recovered_fraction (defaults to 1 - severity) is the sales level, as
    a fraction of the pre-sanction export flow, reached recovery_months
    after onset.  With instant_floor the multiplier jumps straight to the
    recovered level instead of ramping from zero.
    """

    onset: int
    severity: float = 0.8
    recovery_months: int = 3
    recovered_fraction: float | None = None
    borrow_premium: float = 0.07
    base_rate: float = 0.12
    default_horizon: int = 12
    distress_cut_factor: float = 5.0
    asset_sale_fraction: float = 0.0
    warehouse_carry_cost: float = 0.0  # monthly fraction of stored value
    instant_floor: bool = False
    applies_to: tuple[str, ...] | None = None  # None = every enterprise

    def __post_init__(self):
        problems = []
        if self.onset < 1:
            problems.append(f"onset must be >= 1, got {self.onset}")
        if not 0.0 <= self.severity <= 1.0:
            problems.append(f"severity must be in [0, 1], got {self.severity}")
        if self.recovery_months < 0:
            problems.append(f"recovery_months must be >= 0, got {self.recovery_months}")
        if self.recovered_fraction is not None and not 0.0 <= self.recovered_fraction <= 1.0:
            problems.append(f"recovered_fraction must be in [0, 1], got {self.recovered_fraction}")
        if self.borrow_premium < 0.0:
            problems.append(f"borrow_premium must be >= 0, got {self.borrow_premium}")
        if self.base_rate < 0.0:
            problems.append(f"base_rate must be >= 0, got {self.base_rate}")
        if self.default_horizon < 1:
            problems.append(f"default_horizon must be >= 1, got {self.default_horizon}")
        if self.distress_cut_factor < 1.0:
            problems.append(f"distress_cut_factor must be >= 1, got {self.distress_cut_factor}")
        if not 0.0 <= self.asset_sale_fraction <= 1.0:
            problems.append(f"asset_sale_fraction must be in [0, 1], got {self.asset_sale_fraction}")
        if self.warehouse_carry_cost < 0.0:
            problems.append(f"warehouse_carry_cost must be >= 0, got {self.warehouse_carry_cost}")
        if problems:
            raise ValidationError(problems)
        if self.applies_to is not None:
            object.__setattr__(self, "applies_to", tuple(self.applies_to))

    @property
    def recovered(self) -> float:
        return (1.0 - self.severity if self.recovered_fraction is None
                else self.recovered_fraction)

    def applies(self, enterprise_id: str) -> bool:
        return self.applies_to is None or enterprise_id in self.applies_to

    def monthly_borrow_rate(self) -> float:
        return monthly_rate(self.base_rate + self.borrow_premium)


@dataclass(frozen=True)
class DistressState:
    """Cash position and distress bookkeeping for one enterprise.

    warehouse accumulates the value of unsold output; debt is outstanding
    emergency credit; assets is the remaining sellable asset book value.
    """

    cash: float = 0.0
    warehouse: float = 0.0
    consecutive_negative: int = 0
    defaulted_at: int | None = None
    distress_active: bool = False
    debt: float = 0.0
    assets: float = 0.0

    def __post_init__(self):
        if self.consecutive_negative < 0:
            raise ValidationError(["consecutive_negative must be >= 0"])


def sales_multiplier(regime: SanctionsRegime, t: int) -> float:
    """Fraction of the export flow that is actually sold at period t.

    1.0 before onset; at onset sales stop entirely, then ramp linearly to
    the recovered level over recovery_months and stay there.
    """
    if t < regime.onset:
        return 1.0
    if regime.instant_floor:
        return regime.recovered
    elapsed = t - regime.onset
    if regime.recovery_months == 0 or elapsed >= regime.recovery_months:
        return regime.recovered
    return regime.recovered * elapsed / regime.recovery_months


def apply_regime(flows: np.ndarray | Sequence[float], regime: SanctionsRegime,
                 t: int) -> tuple[np.ndarray, np.ndarray]:
    """Split export flows at period t into realized sales and warehouse intake.

    realized = flows * multiplier; the unsold remainder goes to the
    warehouse, so realized + increment == flows exactly.  Before onset the
    flows pass through untouched (bitwise).
    """
    flows = np.asarray(flows, dtype=float)
    if np.any(flows < 0.0):
        raise ValueError(f"export flows must be non-negative at period {t}")
    multiplier = sales_multiplier(regime, t)
    if multiplier == 1.0:
        return flows, np.zeros_like(flows)
    increment = flows - flows * multiplier
    # Re-subtracting makes realized + increment == flows bitwise, which a
    # single rounded product does not guarantee.
    realized = flows - increment
    return realized, increment


def update_distress(state: DistressState, cash_flow: float,
                    regime: SanctionsRegime, t: int) -> DistressState:
    """Advance the distress state by one period.

    Interest on outstanding emergency debt and the carrying cost of
    warehoused value are charged first; a negative cash position is
    covered by new borrowing and extends the negative streak, a
    non-negative one resets it.  The first negative-streak month at or
    after onset activates distress (funding cuts apply from the next
    period, sellable assets are partly liquidated once).  The default is
    recorded when the streak reaches the default horizon.
    """
    interest = state.debt * regime.monthly_borrow_rate()
    carry = state.warehouse * regime.warehouse_carry_cost
    cash = state.cash + cash_flow - interest - carry

    borrowed = 0.0
    if cash < 0.0:
        borrowed = -cash
        cash = 0.0
        streak = state.consecutive_negative + 1
    else:
        streak = 0

    distress_active = state.distress_active
    assets = state.assets
    if not distress_active and streak > 0 and t >= regime.onset:
        distress_active = True
        proceeds = regime.asset_sale_fraction * assets
        cash += proceeds
        assets -= proceeds

    defaulted_at = state.defaulted_at
    if defaulted_at is None and streak >= regime.default_horizon and t > regime.onset:
        defaulted_at = t

    return replace(state, cash=cash, consecutive_negative=streak,
                   defaulted_at=defaulted_at, distress_active=distress_active,
                   debt=state.debt + borrowed, assets=assets)


@dataclass(frozen=True)
class RegimeEffect:
    """Resolved regime action for one enterprise at one period.

    Applied to a freshly stepped state vector: the export part of each
    revenue row is pushed through :func:`apply_regime`; the rest of the
    vector is untouched.  Identity (input returned as-is) when the
    multiplier is 1.
    """

    regime: SanctionsRegime
    t: int
    export_share: float
    revenue_rows: tuple[int, ...]

    def apply(self, x: np.ndarray) -> tuple[np.ndarray, float]:
        """Returns (state after the regime, total warehouse increment)."""
        if sales_multiplier(self.regime, self.t) == 1.0 or self.export_share == 0.0:
            return x, 0.0
        rows = list(self.revenue_rows)
        if not rows:
            return x, 0.0
        export_flows = self.export_share * x[rows]
        realized, increments = apply_regime(export_flows, self.regime, self.t)
        out = x.copy()
        out[rows] = x[rows] - export_flows + realized
        return out, float(np.sum(increments))
