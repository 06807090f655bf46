"""Acceptance suite.

Each criterion runs at its stated tolerance and prints one PASS/FAIL
line (run with ``pytest tests/test_acceptance.py -v -s`` to see them).
The reference scenario under fixtures/reference/ is the committed output
of scripts/calibrate_fixture.py.
"""

import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from sezsim.adaptometry import (
    build_parameter_matrix,
    correlation_matrix,
    detect_structure_change,
    integral_indicator,
)
from sezsim.core import ParameterMatrix
from sezsim.dynamics import simulate
from sezsim.pipeline import run_pipeline
from sezsim.policy import disturbance_sensitivity, evaluate_measure
from sezsim.scenario import parse_scenario

from oracles import correlation_matrix_brute

ONSET = 37


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
    assert ok, f"criterion {criterion}: {detail}"


def random_parameter_matrix(rng) -> ParameterMatrix:
    n = int(rng.integers(2, 11))
    t_max = int(rng.integers(4, 31))
    values = rng.normal(loc=rng.uniform(-50, 50), scale=rng.uniform(0.5, 20),
                        size=(n, t_max))
    names = tuple(f"p{i}" for i in range(n))
    return ParameterMatrix("gen", names, values)


@pytest.fixture(scope="module")
def generated_matrices():
    rng = np.random.default_rng(20240614)
    return [random_parameter_matrix(rng) for _ in range(100)]


@pytest.fixture(scope="module")
def reference(reference_scenario_path):
    return parse_scenario(reference_scenario_path)


@pytest.fixture(scope="module")
def reference_runs(reference):
    s = reference
    baseline = simulate(s.zone, s.grid, s.controls, s.disturbances, (),
                        s.policy, s.seed)
    sanctioned = simulate(s.zone, s.grid, s.controls, s.disturbances,
                          s.regimes, s.policy, s.seed)
    return baseline, sanctioned


def synthetic_break_matrix(tau=ONSET, t_max=60, n=8, seed=99):
    rng = np.random.default_rng(seed)
    profile = rng.uniform(1.0, 10.0, size=n)
    values = np.empty((n, t_max))
    for t in range(1, t_max + 1):
        if t < tau:
            values[:, t - 1] = profile * (1.0 + 0.01 * t)
        else:
            values[:, t - 1] = rng.uniform(1.0, 10.0, size=n)
    names = tuple(f"p{i}" for i in range(n))
    return ParameterMatrix("synthetic", names, values)


def test_criterion_1_correlation_oracle_equivalence(generated_matrices):
    start = time.perf_counter()
    worst = 0.0
    for matrix in generated_matrices:
        got = correlation_matrix(matrix).r
        expected = correlation_matrix_brute(matrix.values)
        worst = max(worst, float(np.max(np.abs(got - expected))))
    elapsed = time.perf_counter() - start
    report(1, worst < 1e-12 and elapsed < 5.0,
           f"100 random matrices, max |R - oracle| = {worst:.2e}, "
           f"runtime {elapsed:.2f}s (< 5s)")


def test_criterion_2_matrix_invariants(generated_matrices):
    ok = True
    for matrix in generated_matrices:
        r = correlation_matrix(matrix).r
        centered = matrix.values - matrix.values.mean(axis=0)
        variant = np.sqrt((centered ** 2).sum(axis=0)) > 0
        ok &= float(np.max(np.abs(r - r.T))) <= 1e-12
        ok &= bool(np.all(np.diag(r)[variant] == 1.0))
        ok &= bool(np.all((r >= -1.0) & (r <= 1.0)))
    report(2, ok, "symmetry 1e-12, unit diagonal on nonconstant columns, "
                  "entries within [-1, 1] on all 100 matrices")


def test_criterion_3_affine_and_permutation_invariance(generated_matrices):
    rng = np.random.default_rng(7)
    worst = 0.0
    for matrix in generated_matrices[:10]:
        base = correlation_matrix(matrix).r
        for alpha in (0.5, 2.0, 10.0):
            for beta in (-3.0, 0.0, 7.0):
                shifted = ParameterMatrix(
                    "t", matrix.parameter_names, alpha * matrix.values + beta)
                worst = max(worst, float(np.max(np.abs(
                    correlation_matrix(shifted).r - base))))
        order = rng.permutation(matrix.n)
        permuted = ParameterMatrix(
            "t", tuple(matrix.parameter_names[i] for i in order),
            matrix.values[order, :])
        worst = max(worst, float(np.max(np.abs(
            correlation_matrix(permuted).r - base))))
    report(3, worst < 1e-9,
           f"max |R - R'| over 9 affine maps and a row permutation = {worst:.2e}")


def test_criterion_4_structural_break_reproduction(reference):
    broken = synthetic_break_matrix()
    corr = correlation_matrix(broken)
    found = detect_structure_change(corr, reference.adaptometry.drop_threshold)
    g_break = integral_indicator(corr, "total-abs").scalar

    intact_values = np.array(broken.values)
    rng = np.random.default_rng(1)
    profile = rng.uniform(1.0, 10.0, size=broken.n)
    for t in range(1, broken.t_max + 1):
        intact_values[:, t - 1] = profile * (1.0 + 0.01 * t)
    intact = ParameterMatrix("intact", broken.parameter_names, intact_values)
    g_intact = integral_indicator(correlation_matrix(intact), "total-abs").scalar

    detection_ok = len(found) == 1 and abs(found[0] - ONSET) <= 1
    drop_ok = g_break < g_intact

    # fixture side: the indicator drop between baseline and sanctioned runs
    s = reference
    result = run_pipeline(s, "compare",
                          out_dir=Path(os.environ.get("TMPDIR", "/tmp"))
                          / "sezsim-acc4")
    g_base = result.analyses["baseline"].indicators["forest-one"].scalar
    g_sanc = result.analyses["sanctions"].indicators["forest-one"].scalar
    rel_drop = (g_base - g_sanc) / g_base * 100.0
    fixture_ok = 25.0 <= rel_drop <= 45.0

    report(4, detection_ok and drop_ok and fixture_ok,
           f"synthetic break detected at {found} (target {ONSET}±1), "
           f"G {g_break:.0f} < intact {g_intact:.0f}; fixture G drop "
           f"{rel_drop:.1f}% within [25%, 45%]")


def test_criterion_5_plan_equals_fact(reference_runs, reference):
    baseline, _ = reference_runs
    traj = baseline.enterprise("forest-one")
    lag = reference.policy.lag
    deviation = float(np.max(np.abs(traj.plan[:, lag:]
                                    - traj.realized.values[:, lag:])))
    report(5, deviation == 0.0,
           f"max |plan - fact| = {deviation} over t > {lag} with zero error, "
           "no regime")


def test_criterion_6_sanctions_conservation_and_identity(reference_runs):
    baseline, sanctioned = reference_runs
    b = baseline.enterprise("forest-one")
    s = sanctioned.enterprise("forest-one")
    pre = slice(0, ONSET - 1)
    identical = (np.array_equal(b.realized.values[:, pre], s.realized.values[:, pre])
                 and np.array_equal(b.cash[pre], s.cash[pre])
                 and np.array_equal(b.observations[:, pre], s.observations[:, pre]))

    produced = float(np.sum(s.production))
    revenue_rows = [i for i, k in enumerate(
        ("revenue", "revenue", "cost", "cost", "cost", "cost", "cost", "cost",
         "neutral", "neutral")) if k == "revenue"]
    sold = float(np.sum(s.realized.values[revenue_rows, :]))
    warehouse = float(s.warehouse[-1])
    conserved = abs(produced - (sold + warehouse)) <= 1e-9 * abs(produced)

    report(6, identical and conserved,
           f"pre-onset bitwise identity: {identical}; production "
           f"{produced:.6e} = sales + warehouse {(sold + warehouse):.6e} to 1e-9")


def test_criterion_7_default_timing(reference_runs, reference):
    _, sanctioned = reference_runs
    defaulted_at = sanctioned.enterprise("forest-one").distress.defaulted_at
    premium = reference.regimes[0].borrow_premium
    ok = defaulted_at is not None and ONSET < defaulted_at <= ONSET + 12
    report(7, ok, f"technical default at period {defaulted_at} within "
                  f"({ONSET}, {ONSET + 12}] at borrow premium {premium}")


def test_criterion_8_calibrated_paper_anchors(reference, reference_runs):
    baseline, sanctioned = reference_runs
    cum_base = float(np.sum(baseline.zone_grp))
    cum_sanc = float(np.sum(sanctioned.zone_grp))
    loss = (cum_base - cum_sanc) / cum_base * 100.0

    s = reference
    u6 = evaluate_measure(s.zone, s.grid, s.controls, s.disturbances,
                          "u6", 0.2, s.policy, s.seed).annual_grp_change_pct
    v10 = disturbance_sensitivity(s.zone, s.grid, s.controls, s.disturbances,
                                  "v10", 0.2, s.policy, s.seed).annual_grp_change_pct

    ok = (abs(loss - 17.3) <= 2.0 and abs(u6 - 0.2) <= 0.05
          and abs(v10 - 2.0) <= 0.5)
    report(8, ok,
           f"5-year GRP loss {loss:.2f}% (17.3 ± 2.0); u6 +20% -> "
           f"{u6:.3f}%/yr (0.2 ± 0.05); v10 +20% -> {v10:.2f}%/yr (2.0 ± 0.5)")


def test_criterion_9_determinism(reference, tmp_path):
    first = run_pipeline(reference, "compare", out_dir=tmp_path / "run1")
    second = run_pipeline(reference, "compare", out_dir=tmp_path / "run2")
    manifests_equal = [(e.path, e.sha256) for e in first.manifest] == \
        [(e.path, e.sha256) for e in second.manifest]
    bytes_equal = all(
        (tmp_path / "run1" / e.path).read_bytes()
        == (tmp_path / "run2" / e.path).read_bytes()
        for e in first.manifest)
    report(9, manifests_equal and bytes_equal,
           f"two compare runs byte-identical across {len(first.manifest)} files")


def test_criterion_10_suite_runtime():
    if os.environ.get("SEZSIM_TIMING_INNER"):
        pytest.skip("inner timing run")
    env = dict(os.environ, SEZSIM_TIMING_INNER="1")
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", str(Path(__file__).parent), "-q",
         "-p", "no:cacheprovider"],
        env=env, capture_output=True, text=True,
        cwd=str(Path(__file__).parent.parent))
    elapsed = time.perf_counter() - start
    ok = proc.returncode == 0 and elapsed < 60.0
    report(10, ok, f"full suite wall-clock {elapsed:.1f}s (< 60s), "
                   f"exit status {proc.returncode}")
