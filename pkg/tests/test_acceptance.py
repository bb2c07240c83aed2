"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line (shown even under output
capture) and then asserts both the criterion and its runtime budget.
"""

import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from perctree.config import DEFAULT
from perctree.core import PhiParams, TreeSpec
from perctree.recurrence import iterate_to_limit, root_probability
from perctree.simulate import exact_root_activation, level_sizes, mc_root_activation
from perctree.sweep import SweepConfig, run_sweep
from perctree.threshold import count_roots, find_pc_regular, find_pf, unoriented_limits

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def _report(number, title, ok, detail, elapsed, budget):
        within = elapsed < budget
        verdict = "PASS" if ok and within else "FAIL"
        with capsys.disabled():
            print(f"\n{verdict} criterion {number} ({title}): {detail} [{elapsed:.2f}s / {budget:g}s]")
        assert ok, detail
        assert within, f"took {elapsed:.1f}s, budget {budget}s"

    return _report


def test_criterion_1_tangency_exact_value(report):
    t0 = time.perf_counter()
    r = find_pc_regular(3, 2)
    elapsed = time.perf_counter() - t0
    # exact rational check of the oracle point (x - 1)^2 (4x - 1) = 0
    p, x = Fraction(1, 9), Fraction(1, 4)
    rational_ok = p + (1 - p) * (3 * x**2 - 2 * x**3) == x and (1 - p) * 6 * x * (1 - x) == 1
    ok = rational_ok and abs(r.p_c - 1 / 9) <= 1e-8 and abs(r.x_tangent - 0.25) <= 1e-8
    report(1, "tangency exact value", ok, f"p_c={r.p_c:.12g} x={r.x_tangent:.12g}", elapsed, 1.0)


def test_criterion_2_root_counts(report):
    t0 = time.perf_counter()
    low = count_roots(PhiParams(7, 5, 0.3)).count
    high = count_roots(PhiParams(7, 5, 0.4)).count
    pc = find_pc_regular(7, 5).p_c
    elapsed = time.perf_counter() - t0
    ok = low == 2 and high == 0 and 0.3 < pc < 0.4
    report(2, "root counts n=7 theta=5", ok, f"roots(0.3)={low} roots(0.4)={high} p_c(7,5)={pc:.12g}", elapsed, 1.0)


def test_criterion_3_exact_enumeration_equivalence(report):
    t0 = time.perf_counter()
    worst, cases = 0.0, 0
    for period in (1, 2, 3):
        for off in itertools.product((2, 3), repeat=period):
            spec = TreeSpec(off)
            depth = 0
            while sum(level_sizes(spec, depth)) <= 24:
                for p in (0.1, 0.3, 0.5, 0.7, 0.9):
                    exact = exact_root_activation(spec, 2, p, depth)
                    worst = max(worst, abs(exact - root_probability(spec, 2, p, depth)))
                    cases += 1
                depth += 1
    elapsed = time.perf_counter() - t0
    report(3, "oracle equivalence", worst <= 1e-12, f"{cases} cases, max abs error {worst:.2e}", elapsed, 30.0)


def test_criterion_4_monte_carlo_concordance(report):
    t0 = time.perf_counter()
    spec = TreeSpec((3, 2))
    zs = []
    for p in (0.2, 0.4):
        est = mc_root_activation(spec, 2, p, 6, trials=1_000_000, seed=2024)
        ref = root_probability(spec, 2, p, 6)
        zs.append((est.mean - ref) / est.stderr)
    elapsed = time.perf_counter() - t0
    ok = all(abs(z) <= 5 for z in zs)
    report(4, "monte carlo concordance", ok, "z = " + ", ".join(f"{z:+.3f}" for z in zs), elapsed, 60.0)


def test_criterion_5_regular_tree_consistency(report):
    t0 = time.perf_counter()
    worst, where = 0.0, None
    for m in range(3, 11):
        for theta in range(2, m):
            d = abs(find_pf(TreeSpec((m,)), theta).p_est - find_pc_regular(m, theta).p_c)
            if d >= worst:
                worst, where = d, (m, theta)
    elapsed = time.perf_counter() - t0
    report(5, "regular-tree consistency", worst <= 1e-7, f"max |p_f - p_c| = {worst:.2e} at {where}", elapsed, 120.0)


def test_criterion_6_sandwich(report):
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    bad = []
    for _ in range(20):
        a, b = (int(v) for v in rng.integers(3, 11, size=2))
        theta = int(rng.integers(2, min(a, b)))
        pf = find_pf(TreeSpec((a, b)), theta).p_est
        lo = find_pc_regular(max(a, b), theta).p_c - 1e-7
        hi = find_pc_regular(min(a, b), theta).p_c + 1e-7
        if not lo <= pf <= hi:
            bad.append((a, b, theta, pf))
    elapsed = time.perf_counter() - t0
    report(6, "sandwich", not bad, f"20 specs, violations: {bad or 'none'}", elapsed, 300.0)


def _is_sorted(vals, increasing):
    return all((y >= x - 1e-7) if increasing else (y <= x + 1e-7) for x, y in zip(vals, vals[1:]))


def test_criterion_7_monotonicity_sweep(report):
    t0 = time.perf_counter()
    p = {}
    for rule in ("equal", "plus1", "plus2", "double"):
        for row in run_sweep(SweepConfig(a_range=(3, 10), b_rule=rule, theta_range=(2, 9), jobs=1)):
            if not row.skipped:
                p[(row.degrees[0], row.degrees[1], row.theta)] = row.p_est
    violations = []
    for a in range(3, 11):
        for theta in range(2, 10):
            bs = sorted(b for (aa, b, t) in p if aa == a and t == theta)
            if not _is_sorted([p[(a, b, theta)] for b in bs], increasing=False):
                violations.append(("b", a, theta))
    for a, b in {(a, b) for (a, b, _) in p}:
        ts = sorted(t for (aa, bb, t) in p if (aa, bb) == (a, b))
        if not _is_sorted([p[(a, b, t)] for t in ts], increasing=True):
            violations.append(("theta", a, b))
    elapsed = time.perf_counter() - t0
    report(7, "monotonicity sweep", not violations,
           f"{len(p)} cells, violations: {violations or 'none'}", elapsed, 600.0)


def test_criterion_8_rotation_symmetry(report):
    rng = np.random.default_rng(8)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(10):
        period = int(rng.integers(2, 4))
        spec = TreeSpec(tuple(int(m) for m in rng.integers(3, 11, size=period)))
        theta = int(rng.integers(2, min(spec.offspring)))
        vals = [find_pf(spec.rotated(k), theta).p_est for k in range(period)]
        worst = max(worst, max(vals) - min(vals))
    elapsed = time.perf_counter() - t0
    report(8, "rotation symmetry", worst <= 1e-9, f"max spread {worst:.2e}", elapsed, 300.0)


def test_criterion_9_unoriented_dominance(report):
    rng = np.random.default_rng(9)
    t0 = time.perf_counter()
    failures, full = [], 0
    eps = DEFAULT.eps_one
    for _ in range(50):
        a, b = (int(v) for v in rng.integers(3, 11, size=2))
        theta = int(rng.integers(2, min(a, b)))
        # straddle the threshold: uniform draws on (0, 1) are mostly supercritical
        p = float(rng.uniform(0.0, min(1.0, 2 * find_pc_regular(min(a, b), theta).p_c)))
        u = unoriented_limits(a, b, theta, p)
        dominated = u.x_inf >= u.x_oriented and u.y_inf >= u.y_oriented
        oriented_full = iterate_to_limit(TreeSpec((a, b)), theta, p).is_full(eps)
        same = (u.x_inf > 1 - eps) == oriented_full and (u.y_inf > 1 - eps) == oriented_full
        full += oriented_full
        if not (dominated and same):
            failures.append((a, b, theta, p))
    elapsed = time.perf_counter() - t0
    report(9, "unoriented dominance", not failures,
           f"50 draws ({full} full), failures: {failures or 'none'}", elapsed, 60.0)
