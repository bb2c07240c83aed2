from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from perctree.config import DEFAULT
from perctree.core import PhiParams, TreeSpec, phi
from perctree.recurrence import (
    OrientedState,
    composite_map,
    iterate_to_limit,
    root_probability,
    step,
    trajectory,
)
from perctree.threshold import find_pc_regular

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def spec_theta(draw, max_period=4, max_m=12, strict=False):
    offspring = tuple(draw(st.lists(st.integers(3 if strict else 2, max_m), min_size=1, max_size=max_period)))
    top = min(offspring) - 1 if strict else min(offspring)
    return TreeSpec(offspring), draw(st.integers(2, top))


def smallest_root_of_cubic(p):
    # (1 - p)(3x^2 - 2x^3) + p - x = 0 on [0, 1]
    roots = np.roots([-2 * (1 - p), 3 * (1 - p), -1.0, p])
    real = sorted(r.real for r in roots if abs(r.imag) < 1e-12 and -1e-12 <= r.real <= 1 + 1e-12)
    return real[0]


# -- single steps ----------------------------------------------------------


def test_step_example_exact():
    spec = TreeSpec((3, 3))
    s1 = step(spec, 2, 1 / 9, OrientedState.initial(spec, 1 / 9))
    p = Fraction(1, 9)
    expected = p + (1 - p) * (3 * p**2 - 2 * p**3)  # 929/6561
    assert s1.t == 1
    assert s1.probs == pytest.approx((float(expected),) * 2, abs=1e-15)


def test_step_edges():
    spec = TreeSpec((3, 2))
    assert step(spec, 2, 0.0, OrientedState.initial(spec, 0.0)).probs == (0.0, 0.0)
    assert step(spec, 2, 1.0, OrientedState.initial(spec, 1.0)).probs == (1.0, 1.0)
    with pytest.raises(ValueError):
        step(spec, 2, 0.3, OrientedState(0, (0.3,)))


def test_step_reads_the_next_class():
    spec = TreeSpec((3, 5))
    s = step(spec, 2, 0.2, OrientedState(0, (0.4, 0.7)))
    assert s.probs[0] == pytest.approx(phi(PhiParams(3, 2, 0.2), 0.7), abs=1e-15)
    assert s.probs[1] == pytest.approx(phi(PhiParams(5, 2, 0.2), 0.4), abs=1e-15)


def test_theta_range_checks():
    with pytest.raises(ValueError):
        trajectory(TreeSpec((3,)), 1, 0.2, 3)
    with pytest.raises(ValueError):
        trajectory(TreeSpec((3, 2)), 3, 0.2, 3)
    t = trajectory(TreeSpec((3, 2)), 3, 0.2, 3, relaxed=True)
    # class 1 has two children and never becomes active from below
    assert np.all(t[:, 1] == pytest.approx(0.2))


# -- limits --------------------------------------------------------------------


def test_limit_above_threshold_is_one():
    lim = iterate_to_limit(TreeSpec((3,)), 2, 0.2)
    assert lim.converged and lim.is_full()


@pytest.mark.parametrize("p", [0.01, 0.05, 0.1])
def test_limit_below_threshold_is_smallest_fixed_point(p):
    lim = iterate_to_limit(TreeSpec((3,)), 2, p)
    assert lim.converged and not lim.is_full()
    assert lim.limits[0] == pytest.approx(smallest_root_of_cubic(p), abs=1e-10)
    assert p < lim.limits[0] < 0.25


def test_repeated_regular_tree_equals_regular():
    a = iterate_to_limit(TreeSpec((3, 3)), 2, 0.05)
    b = iterate_to_limit(TreeSpec((3,)), 2, 0.05)
    assert a.limits == pytest.approx(b.limits * 2, abs=1e-13)


def test_limit_iteration_cap_is_reported():
    lim = iterate_to_limit(TreeSpec((3,)), 2, 1 / 9 + 1e-12, DEFAULT.with_(max_iter=50))
    assert not lim.converged and lim.iterations == 50


def test_composite_map_examples():
    spec = TreeSpec((3, 5))
    inner = phi(PhiParams(5, 2, 0.1), 0.3)
    assert composite_map(spec, 2, 0.1, 0, 0.3) == pytest.approx(phi(PhiParams(3, 2, 0.1), inner), abs=1e-15)
    assert composite_map(TreeSpec((3,)), 2, 0.1, 0, 0.3) == pytest.approx(phi(PhiParams(3, 2, 0.1), 0.3))
    with pytest.raises(IndexError):
        composite_map(spec, 2, 0.1, 2, 0.3)


# -- invariants ----------------------------------------------------------------


def test_trajectories_are_monotone_over_many_draws():
    rng = np.random.default_rng(20240611)
    for _ in range(10_000):
        period = int(rng.integers(1, 5))
        spec = TreeSpec(tuple(int(m) for m in rng.integers(2, 11, size=period)))
        theta = int(rng.integers(2, max(spec.offspring) + 2))
        traj = trajectory(spec, theta, float(rng.random()), 100, relaxed=True)
        assert np.all(np.diff(traj, axis=0) >= 0.0)
        assert np.all((traj >= 0.0) & (traj <= 1.0))


@given(spec_theta(), unit)
def test_limit_is_a_fixed_point(st_, p):
    spec, theta = st_
    lim = iterate_to_limit(spec, theta, p)
    if not lim.converged:
        return
    again = step(spec, theta, p, OrientedState(0, lim.limits))
    assert again.probs == pytest.approx(lim.limits, abs=1e-12)
    for k in range(spec.period):
        assert composite_map(spec, theta, p, k, lim.limits[k]) == pytest.approx(lim.limits[k], abs=1e-11)


@given(spec_theta(), unit, st.integers(0, 40))
def test_root_probability_is_class_zero_of_trajectory(st_, p, depth):
    spec, theta = st_
    t = trajectory(spec, theta, p, depth)
    assert root_probability(spec, theta, p, depth) == t[depth, 0]
    assert t[0] == pytest.approx([p] * spec.period)


@given(spec_theta(), unit, unit)
def test_limit_monotone_in_p(st_, p, q):
    spec, theta = st_
    lo, hi = sorted((p, q))
    a = iterate_to_limit(spec, theta, lo)
    b = iterate_to_limit(spec, theta, hi)
    if a.converged and b.converged:
        assert all(x <= y + 1e-9 for x, y in zip(a.limits, b.limits))


@given(spec_theta(max_m=10, strict=True), st.floats(0.0, 0.999))
def test_full_activation_sandwiched_by_regular_trees(st_, p):
    spec, theta = st_
    lim = iterate_to_limit(spec, theta, p)
    if not lim.converged:
        return
    p_low = find_pc_regular(max(spec.offspring), theta).p_c
    p_high = find_pc_regular(min(spec.offspring), theta).p_c
    if p > p_high + 1e-6:
        assert lim.is_full()
    if p < p_low - 1e-6:
        assert not lim.is_full()
