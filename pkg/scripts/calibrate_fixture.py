#!/usr/bin/env python3
"""Builds and calibrates the committed reference scenario.

The reference enterprise is a wood-processing zone resident: two product
lines (sawnwood mostly exported, pellets and byproducts), input costs
indexed to resource/labor/technology channels, wages compounding at the
wage-growth channel, and informational lines for unsold inventory value
and emergency-credit interest.

Calibration pins four behavioural anchors, each with its own lever:

  dollar sensitivity   +20% on v10 -> +2.0 %/yr zone GRP   (dollar E entry)
  subsidy sensitivity  +20% on u6  -> +0.2 %/yr zone GRP   (u6 B entry)
  sanctions damage     17.3 % cumulative GRP loss          (export share)
  indicator drop       ~35 % fall of the integral G        (inventory decay)

plus a technical default inside (37, 49].  Finally everything monetary is
rescaled so the 5-year baseline GRP is 69 billion rubles.  The result is
written as a relocatable scenario under fixtures/reference/ and every
anchor is re-verified on the files actually written.

Run from the repository root:  python scripts/calibrate_fixture.py
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT / "src"))

from sezsim.adaptometry import (
    build_parameter_matrix,
    correlation_matrix,
    detect_structure_change,
    integral_indicator,
)
from sezsim.core import (
    ControlSchedule,
    ControlVector,
    DisturbanceSchedule,
    DisturbanceVector,
    Enterprise,
    SystemMatrices,
    TimeGrid,
    Zone,
    validate_zone,
)
from sezsim.dynamics import PlanningPolicy, simulate
from sezsim.policy import (
    THOUSAND_TO_BILLION,
    disturbance_sensitivity,
    evaluate_measure,
)
from sezsim.sanctions import SanctionsRegime
from sezsim.scenario import AdaptometrySettings, Scenario, parse_scenario, save_scenario

from sezsim.core import monthly_rate

T_MAX = 60
ONSET = 37

NAMES = ("sawnwood_sales", "pellet_sales", "raw_materials", "wages",
         "logistics", "energy", "admin", "taxes_fees", "inventory_value",
         "debt_service")
KINDS = ("revenue", "revenue", "cost", "cost", "cost", "cost", "cost",
         "cost", "neutral", "neutral")

# Steady monthly levels before the global rescale, thousand rubles/month.
SAWNWOOD = 1400.0
PELLETS = 600.0
MATERIALS = 400.0
WAGES = 1000.0
LOGISTICS = 150.0
ENERGY = 120.0
ADMIN = 180.0

SAWNWOOD_MEMORY = 0.3     # A self-weight of the sawnwood line

# Sensitivity bases wiring the annual-rate channels into cost levels.
WAGES_V2_BASE = 30_000.0
MATERIALS_V9_BASE = 18_000.0

CONTROLS = ControlVector(
    profit_tax_regional=0.17, profit_tax_consolidated=0.03,
    transport_tax=0.05, property_tax=0.022, electricity_price=2.4,
    transport_tariff=0.4, social_rate=0.30, land_rent=35.0, forest_rent=50.0)

# Tax/fee bases feeding the taxes_fees line through B.
TAX_BASES = {"u1": 300.0, "u2": 300.0, "u4": 1000.0, "u7": 100.0,
             "u8": 0.6, "u9": 0.28}
TAXES_LEVEL = (0.17 * 300.0 + 0.03 * 300.0 + 0.022 * 1000.0 + 0.30 * 100.0
               + 35.0 * 0.6 + 50.0 * 0.28)  # = 147

TRANSPORT_TAX_BASE = 100.0   # u3 -> logistics
ELECTRICITY_VOLUME = 20.0    # u5 -> energy

CASH0 = 50.0
ASSETS0 = 2000.0

TARGET_V10_PCT = 2.0         # %/yr for +20% dollar
TARGET_U6_PCT = 0.2          # %/yr for +20% subsidy
TARGET_LOSS_PCT = 17.3       # cumulative 5-year GRP loss
TARGET_DROP_PCT = 35.0       # integral-indicator drop
TARGET_BASELINE_BLN = 69.0   # cumulative baseline GRP


def build_scenario(e10: float, beta: float, export_share: float,
                   inventory_decay: float, scale: float = 1.0) -> Scenario:
    n = len(NAMES)
    a = np.zeros((n, n))
    a[0, 0] = SAWNWOOD_MEMORY
    a[8, 8] = inventory_decay

    wage_rate = monthly_rate(0.04)   # default v2, converted
    infl_rate = monthly_rate(0.04)   # default v9, converted

    e = np.zeros((n, 10))
    e[0, 9] = e10                                   # dollar-denominated exports
    e[0, 4] = SAWNWOOD * (1 - SAWNWOOD_MEMORY) - 70.0 * e10  # material-flow index
    e[1, 4] = PELLETS                               # byproduct demand index v5
    e[2, 8] = MATERIALS_V9_BASE                     # input prices follow v9
    e[2, 0] = MATERIALS - MATERIALS_V9_BASE * infl_rate  # resource-price index v1
    e[3, 1] = WAGES_V2_BASE                         # wage level follows v2
    e[3, 6] = WAGES - WAGES_V2_BASE * wage_rate     # labor-resource index v7
    e[4, 5] = LOGISTICS + CONTROLS.transport_tariff * beta \
        - CONTROLS.transport_tax * TRANSPORT_TAX_BASE  # gross logistics, v6
    e[5, 7] = ENERGY - CONTROLS.electricity_price * ELECTRICITY_VOLUME  # v8
    e[6, 6] = ADMIN                                 # labor-resource index v7

    b = np.zeros((n, 9))
    b[4, 2] = TRANSPORT_TAX_BASE
    b[4, 5] = -beta
    b[5, 4] = ELECTRICITY_VOLUME
    b[7, 0] = TAX_BASES["u1"]
    b[7, 1] = TAX_BASES["u2"]
    b[7, 3] = TAX_BASES["u4"]
    b[7, 6] = TAX_BASES["u7"]
    b[7, 7] = TAX_BASES["u8"]
    b[7, 8] = TAX_BASES["u9"]

    h = np.array([[1.0, 1.0, -1.0, 0.0, -1.0, -1.0, -1.0, 0.0, 0.0, 0.0]])

    x0 = np.array([SAWNWOOD, PELLETS, MATERIALS, WAGES, LOGISTICS, ENERGY,
                   ADMIN, TAXES_LEVEL, 0.0, 0.0])

    enterprise = Enterprise(
        id="forest-one", parameter_names=NAMES, parameter_kinds=KINDS,
        x0=x0 * scale,
        matrices=SystemMatrices(a=a, b=b * scale, e=e * scale, h=h),
        export_share=export_share, cash0=CASH0 * scale,
        assets0=ASSETS0 * scale,
        distress_cut_rows=("raw_materials", "admin"),
        warehouse_row="inventory_value", debt_service_row="debt_service")

    regime = SanctionsRegime(
        onset=ONSET, severity=0.8, recovery_months=3, recovered_fraction=0.2,
        borrow_premium=0.07, base_rate=0.12, default_horizon=12,
        distress_cut_factor=5.0, asset_sale_fraction=0.02)

    return Scenario(
        grid=TimeGrid(T_MAX),
        zone=Zone(id="taiga-sez", enterprises=(enterprise,)),
        controls=ControlSchedule(default=CONTROLS),
        disturbances=DisturbanceSchedule(default=DisturbanceVector()),
        regimes=(regime,),
        policy=PlanningPolicy(lag=1),
        adaptometry=AdaptometrySettings(variant="total-abs", drop_threshold=0.3),
        seed=0)


def run_pair(scenario: Scenario):
    base = simulate(scenario.zone, scenario.grid, scenario.controls,
                    scenario.disturbances, (), scenario.policy, scenario.seed)
    sanc = simulate(scenario.zone, scenario.grid, scenario.controls,
                    scenario.disturbances, scenario.regimes, scenario.policy,
                    scenario.seed)
    return base, sanc


def measure_v10(scenario: Scenario) -> float:
    return disturbance_sensitivity(
        scenario.zone, scenario.grid, scenario.controls, scenario.disturbances,
        "v10", 0.2, scenario.policy, scenario.seed).annual_grp_change_pct


def measure_u6(scenario: Scenario) -> float:
    return evaluate_measure(
        scenario.zone, scenario.grid, scenario.controls, scenario.disturbances,
        "u6", 0.2, scenario.policy, scenario.seed).annual_grp_change_pct


def measure_loss(scenario: Scenario) -> float:
    base, sanc = run_pair(scenario)
    cum_base = float(np.sum(base.zone_grp))
    cum_sanc = float(np.sum(sanc.zone_grp))
    return (cum_base - cum_sanc) / cum_base * 100.0


def indicator_drop(scenario: Scenario):
    base, sanc = run_pair(scenario)
    g = {}
    breaks = {}
    for label, traj in (("base", base), ("sanc", sanc)):
        corr = correlation_matrix(build_parameter_matrix(traj, "forest-one"))
        g[label] = integral_indicator(corr, "total-abs").scalar
        breaks[label] = detect_structure_change(
            corr, scenario.adaptometry.drop_threshold)
    drop = (g["base"] - g["sanc"]) / g["base"] * 100.0
    return drop, g, breaks


def calibrate() -> dict:
    params = dict(e10=1.2, beta=30.0, export_share=0.5, inventory_decay=0.85)

    for sweep in range(3):
        # Dollar channel: the response is proportional to the E entry, so a
        # ratio update converges in a couple of passes.
        for _ in range(3):
            measured = measure_v10(build_scenario(**params))
            params["e10"] *= TARGET_V10_PCT / measured
        # Subsidy channel: same shape (response linear in the B entry).
        for _ in range(3):
            measured = measure_u6(build_scenario(**params))
            params["beta"] *= TARGET_U6_PCT / measured
        # Export exposure: cumulative loss is monotone in the share.
        lo, hi = 0.05, 0.95
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            params["export_share"] = mid
            if measure_loss(build_scenario(**params)) < TARGET_LOSS_PCT:
                lo = mid
            else:
                hi = mid
        params["export_share"] = 0.5 * (lo + hi)

    # Inventory carrying decay: scan for the indicator-drop target.
    best = None
    for decay in np.linspace(0.50, 1.0, 21):
        trial = dict(params, inventory_decay=float(decay))
        drop, _, _ = indicator_drop(build_scenario(**trial))
        if best is None or abs(drop - TARGET_DROP_PCT) < best[0]:
            best = (abs(drop - TARGET_DROP_PCT), float(decay))
    params["inventory_decay"] = best[1]

    # Global money rescale to the documented 69 bln baseline.
    base, _ = run_pair(build_scenario(**params))
    cum_bln = float(np.sum(base.zone_grp)) * THOUSAND_TO_BILLION
    scale = TARGET_BASELINE_BLN / cum_bln

    # Rounded values commit cleanly; the anchors move by far less than
    # their verification tolerances at these granularities.
    params["e10"] = round(params["e10"], 4)
    params["beta"] = round(params["beta"], 4)
    params["export_share"] = round(params["export_share"], 4)
    params["scale"] = round(scale, 6)
    return params


def verify(scenario: Scenario) -> dict:
    report = {}
    report["v10_pct"] = measure_v10(scenario)
    report["u6_pct"] = measure_u6(scenario)
    report["loss_pct"] = measure_loss(scenario)
    drop, g, breaks = indicator_drop(scenario)
    report["g_drop_pct"] = drop
    report["g_base"] = g["base"]
    report["g_sanc"] = g["sanc"]
    report["breaks_base"] = breaks["base"]
    report["breaks_sanc"] = breaks["sanc"]

    base, sanc = run_pair(scenario)
    report["baseline_bln"] = float(np.sum(base.zone_grp)) * THOUSAND_TO_BILLION
    report["sanctions_bln"] = float(np.sum(sanc.zone_grp)) * THOUSAND_TO_BILLION
    report["defaulted_at"] = sanc.enterprise("forest-one").distress.defaulted_at

    ent_base = base.enterprise("forest-one")
    ent_sanc = sanc.enterprise("forest-one")
    report["plan_equals_fact"] = bool(
        np.array_equal(ent_base.plan, ent_base.realized.values))
    report["pre_onset_identical"] = bool(np.array_equal(
        ent_base.realized.values[:, :ONSET - 1],
        ent_sanc.realized.values[:, :ONSET - 1]))
    return report


def check(report: dict) -> list[str]:
    problems = []
    if abs(report["v10_pct"] - TARGET_V10_PCT) > 0.2:
        problems.append(f"v10 anchor off: {report['v10_pct']:.3f}")
    if abs(report["u6_pct"] - TARGET_U6_PCT) > 0.02:
        problems.append(f"u6 anchor off: {report['u6_pct']:.3f}")
    if abs(report["loss_pct"] - TARGET_LOSS_PCT) > 0.5:
        problems.append(f"loss anchor off: {report['loss_pct']:.3f}")
    if not 27.0 <= report["g_drop_pct"] <= 43.0:
        problems.append(f"indicator drop outside band: {report['g_drop_pct']:.2f}")
    if not (ONSET < (report["defaulted_at"] or 0) <= ONSET + 12):
        problems.append(f"default timing off: {report['defaulted_at']}")
    if report["breaks_sanc"][:1] not in ([36], [37], [38]):
        problems.append(f"break not at onset: {report['breaks_sanc']}")
    if report["breaks_base"]:
        problems.append(f"spurious baseline break: {report['breaks_base']}")
    if not report["plan_equals_fact"]:
        problems.append("plan does not equal fact on the baseline run")
    if not report["pre_onset_identical"]:
        problems.append("pre-onset trajectories differ")
    return problems


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(REPO_ROOT / "fixtures" / "reference"))
    args = parser.parse_args(argv)

    params = calibrate()
    scenario = build_scenario(**params)
    assert validate_zone(scenario.zone, scenario.grid) == []

    target = save_scenario(scenario, args.out)
    reloaded = parse_scenario(target)
    report = verify(reloaded)

    print("calibrated parameters:")
    for key, value in params.items():
        print(f"  {key} = {value!r}")
    print("verification on the written fixture:")
    for key, value in report.items():
        print(f"  {key} = {value}")

    problems = check(report)
    if problems:
        print("CALIBRATION FAILED:")
        for problem in problems:
            print(f"  - {problem}")
        return 1
    print(f"fixture written to {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
