"""Built-in oracle checks run by ``perctree verify``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from perctree.config import DEFAULT, Tolerances
from perctree.core import PhiParams, TreeSpec
from perctree.recurrence import iterate_to_limit, root_probability
from perctree.simulate import exact_root_activation
from perctree.threshold import count_roots, find_pc_regular, find_pf

GROUPS = ("tangency", "figures", "enumeration", "sandwich", "monotonicity")


@dataclass(frozen=True)
class Check:
    group: str
    name: str
    run: Callable[[Tolerances], tuple[bool, str]]


@dataclass(frozen=True)
class Outcome:
    group: str
    name: str
    passed: bool
    detail: str


def _pc_3_2(tol):
    r = find_pc_regular(3, 2)
    ok = abs(r.p_c - 1 / 9) <= 1e-10 and abs(r.x_tangent - 0.25) <= 1e-10 and max(r.residuals) <= 1e-12
    return ok, f"p_c={r.p_c:.12g} x={r.x_tangent:.12g} residuals={r.residuals}"


def _pc_7_5(tol):
    r = find_pc_regular(7, 5)
    return 0.3 < r.p_c < 0.4, f"p_c={r.p_c:.12g}"


def _limit_above(tol):
    lim = iterate_to_limit(TreeSpec((3,)), 2, 0.2, tol)
    return lim.converged and lim.is_full(tol.eps_one), f"limit={lim.limits[0]!r} after {lim.iterations}"


def _limit_below(tol):
    lim = iterate_to_limit(TreeSpec((3,)), 2, 0.05, tol)
    x = lim.limits[0]
    # smallest fixed point of phi lies below the tangency point 1/4
    return lim.converged and 0.05 < x < 0.25, f"limit={x!r}"


def _pf_regular(tol):
    r = find_pf(TreeSpec((3,)), 2, tol)
    return abs(r.p_est - 1 / 9) <= 1e-8, f"p_est={r.p_est:.12g} criterion={r.criterion.value}"


def _roots(p, expected):
    def check(tol):
        n = count_roots(PhiParams(7, 5, p)).count
        return n == expected, f"{n} roots of Phi_{p} on (0,1) for n=7 theta=5"

    return check


def _enumeration(degrees, depth):
    def check(tol):
        spec = TreeSpec(degrees)
        worst = 0.0
        for p in (0.1, 0.3, 0.5, 0.7, 0.9):
            exact = exact_root_activation(spec, 2, p, depth)
            worst = max(worst, abs(exact - root_probability(spec, 2, p, depth)))
        return worst <= 1e-12, f"max |exact - recurrence| = {worst:.3g}"

    return check


def _sandwich(degrees, theta):
    def check(tol):
        spec = TreeSpec(degrees)
        pf = find_pf(spec, theta, tol).p_est
        lo = find_pc_regular(max(degrees), theta).p_c
        hi = find_pc_regular(min(degrees), theta).p_c
        return lo - 1e-7 <= pf <= hi + 1e-7, f"{lo:.12g} <= {pf:.12g} <= {hi:.12g}"

    return check


def _monotone_b(tol):
    vals = [find_pf(TreeSpec((3, b)), 2, tol).p_est for b in range(3, 8)]
    ok = all(y <= x + 1e-7 for x, y in zip(vals, vals[1:]))
    return ok, "p_f(3, b), b=3..7: " + ", ".join(f"{v:.9g}" for v in vals)


def _monotone_theta(tol):
    vals = [find_pf(TreeSpec((6, 7)), t, tol).p_est for t in range(2, 6)]
    ok = all(y >= x - 1e-7 for x, y in zip(vals, vals[1:]))
    return ok, "p_f(6, 7), theta=2..5: " + ", ".join(f"{v:.9g}" for v in vals)


CHECKS = (
    Check("tangency", "pc_3_2_exact", _pc_3_2),
    Check("tangency", "pc_7_5_window", _pc_7_5),
    Check("tangency", "limit_above_pc", _limit_above),
    Check("tangency", "limit_below_pc", _limit_below),
    Check("tangency", "pf_regular_matches_pc", _pf_regular),
    Check("figures", "two_roots_7_5_p03", _roots(0.3, 2)),
    Check("figures", "no_roots_7_5_p04", _roots(0.4, 0)),
    Check("enumeration", "exact_vs_recurrence_3_2", _enumeration((3, 2), 2)),
    Check("enumeration", "exact_vs_recurrence_2_3", _enumeration((2, 3), 3)),
    Check("enumeration", "exact_vs_recurrence_2_2_3", _enumeration((2, 2, 3), 3)),
    Check("sandwich", "sandwich_8_4_theta3", _sandwich((8, 4), 3)),
    Check("sandwich", "sandwich_3_4_5_theta2", _sandwich((3, 4, 5), 2)),
    Check("monotonicity", "pf_nonincreasing_in_b", _monotone_b),
    Check("monotonicity", "pf_nondecreasing_in_theta", _monotone_theta),
)


def run_checks(only: tuple[str, ...] = (), tol: Tolerances = DEFAULT) -> list[Outcome]:
    for g in only:
        if g not in GROUPS:
            raise ValueError(f"unknown check group {g!r}; choose from {GROUPS}")
    outcomes = []
    for check in CHECKS:
        if only and check.group not in only:
            continue
        try:
            passed, detail = check.run(tol)
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        outcomes.append(Outcome(check.group, check.name, bool(passed), detail))
    return outcomes
