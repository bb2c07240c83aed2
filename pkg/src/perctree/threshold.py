"""Critical probabilities.

Two kinds of threshold are computed here:

* ``p_c`` of a regular tree, from the tangency system phi(x) = x,
  phi'(x) = 1 (``find_pc_regular``);
* ``p_f`` of an l-periodic tree, by bisection on a full-activity test
  (``find_pf``). The test is that the one-period composite map psi satisfies
  psi(x) > x on (0, 1), checked by a grid scan plus local refinement, with
  the plain fixed-point iteration run alongside as a cross-check.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from perctree import _kernels
from perctree.config import DEFAULT, Tolerances
from perctree.core import PhiParams, TreeSpec, binom_tail, phi_prime_stationary_x, probability
from perctree.recurrence import ConvergenceError, LimitResult, iterate_to_limit


class CriterionDisagreement(RuntimeError):
    """The scan and the iteration classify the same p differently."""


class Criterion(str, enum.Enum):
    ROOT_SCAN = "root-scan"
    ITERATION = "iteration"
    BOTH = "both-agree"


# --------------------------------------------------------------------------
# roots of Phi_p


@dataclass(frozen=True)
class Root:
    x: float
    lo: float
    hi: float


@dataclass(frozen=True)
class RootScan:
    roots: tuple[Root, ...]

    @property
    def count(self) -> int:
        return len(self.roots)


def count_roots(params: PhiParams, grid_size: int = 10_000) -> RootScan:
    """Sign-change roots of Phi_p(x) = phi(x) - x strictly inside (0, 1).

    A root where Phi only touches zero without crossing is invisible to the
    scan unless it lands on a grid point exactly.
    """
    if grid_size < 100:
        raise ValueError("grid_size must be >= 100")
    off = np.array([params.n], dtype=np.int64)
    xs = np.linspace(0.0, 1.0, grid_size + 1)[1:-1]
    vals = _kernels.composite_gap(off, 0, params.theta, params.p, xs)

    def f(x):
        return _kernels.phi(params.n, params.theta, params.p, x) - x

    roots = []
    for i, v in enumerate(vals):
        if v == 0.0:
            roots.append(Root(float(xs[i]), float(xs[i]), float(xs[i])))
        elif i + 1 < len(vals) and v * vals[i + 1] < 0.0:
            lo, hi = float(xs[i]), float(xs[i + 1])
            roots.append(Root(brentq(f, lo, hi, xtol=1e-12), lo, hi))
    return RootScan(tuple(roots))


# --------------------------------------------------------------------------
# p_c of a regular tree


@dataclass(frozen=True)
class TangencyResult:
    p_c: float
    x_tangent: float
    newton_iters: int
    residuals: tuple[float, float]  # |Phi|, |phi' - 1|
    fallback: bool = False


def _tangency_terms(n, theta, p, x):
    """Phi, Phi', and the partials needed for Newton on (p, x)."""
    c = n * math.comb(n - 1, theta - 1)
    t = _kernels.tail(n, theta, x)
    d1 = c * x ** (theta - 1) * (1.0 - x) ** (n - theta)
    d2 = c * x ** (theta - 2) * (1.0 - x) ** (n - theta - 1) * (theta - 1 - (n - 1) * x)
    f1 = p + (1.0 - p) * t - x
    f2 = (1.0 - p) * d1 - 1.0
    jac = ((1.0 - t, (1.0 - p) * d1 - 1.0), (-d1, (1.0 - p) * d2))
    return f1, f2, jac


def _newton_tangency(n, theta, p, x, max_iter=100, halvings=40):
    f1, f2, jac = _tangency_terms(n, theta, p, x)
    norm = max(abs(f1), abs(f2))
    it = 0
    while it < max_iter and norm > 1e-15:
        (a, b), (c, d) = jac
        det = a * d - b * c
        if det == 0.0 or not math.isfinite(det):
            return None
        dp = (d * f1 - b * f2) / det
        dx = (a * f2 - c * f1) / det
        lam = 1.0
        for _ in range(halvings + 1):
            pn, xn = p - lam * dp, x - lam * dx
            if 0.0 < pn < 1.0 and 0.0 < xn < 1.0:
                g1, g2, gjac = _tangency_terms(n, theta, pn, xn)
                gnorm = max(abs(g1), abs(g2))
                if gnorm < norm:
                    break
            lam *= 0.5
        else:
            # no decrease possible: either converged to rounding or stuck
            break
        p, x, f1, f2, jac, norm = pn, xn, g1, g2, gjac, gnorm
        it += 1
    return p, x, it, (abs(f1), abs(f2))


def _nested_tangency(n, theta, x_star):
    def min_phi(p):
        res = minimize_scalar(
            lambda x: _kernels.phi(n, theta, p, x) - x,
            bounds=(0.0, x_star),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return res.fun, res.x

    p = brentq(lambda q: min_phi(q)[0], 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return p, min_phi(p)[1]


def find_pc_regular(n: int, theta: int) -> TangencyResult:
    """Critical probability of the regular tree with ``n`` children per node."""
    x_star = phi_prime_stationary_x(n, theta)

    def acceptable(sol):
        if sol is None:
            return False
        p, x, _, (r1, r2) = sol
        return 0.0 < p < 1.0 and 0.0 < x < x_star and r1 <= 1e-12 and r2 <= 1e-12

    sol = _newton_tangency(n, theta, 0.1, x_star / 2)
    fallback = False
    if not acceptable(sol):
        fallback = True
        p0, x0 = _nested_tangency(n, theta, x_star)
        polished = _newton_tangency(n, theta, p0, x0)
        if acceptable(polished):
            sol = polished
        else:
            f1, f2, _ = _tangency_terms(n, theta, p0, x0)
            sol = (p0, x0, 0, (abs(f1), abs(f2)))
    p, x, iters, res = sol
    return TangencyResult(float(p), float(x), int(iters), (float(res[0]), float(res[1])), fallback)


# --------------------------------------------------------------------------
# full activity of periodic trees


@dataclass(frozen=True)
class ScanCertificate:
    x_min: float
    margin: float  # min of psi(x) - x over (0, 1 - delta]
    iteration: LimitResult | None = None
    verdict: str = "unchecked"  # full | partial | stalled | inconclusive | unchecked
    bottleneck_steps: float | None = None


def _scan(off: np.ndarray, theta: int, p: float, tol: Tolerances) -> tuple[float, float, float]:
    top = 1.0 - tol.scan_delta
    xs = np.linspace(0.0, top, tol.scan_grid + 1)[1:]
    gaps = _kernels.composite_gap(off, 0, theta, p, xs)

    def gap(x):
        return _kernels.composite(off, 0, theta, p, x) - x

    # psi(x) - x decays to 0 at x = 1, so the last grid point is always a
    # spurious small value; refine every interior local minimum as well.
    i_last = len(xs) - 1
    x_min, margin = float(xs[i_last]), float(gaps[i_last])
    inner = gaps[1:-1]
    local = np.flatnonzero((inner <= gaps[:-2]) & (inner <= gaps[2:])) + 1
    if gaps[0] <= gaps[1]:
        local = np.concatenate(([0], local))
    local = local[np.argsort(gaps[local], kind="stable")[:16]]
    for i in local:
        lo = float(xs[i - 1]) if i > 0 else 0.0
        hi = float(xs[i + 1])
        res = minimize_scalar(gap, bounds=(lo, hi), method="bounded", options={"xatol": tol.refine_width})
        for x, v in ((float(xs[i]), float(gaps[i])), (float(res.x), float(res.fun))):
            if v < margin:
                x_min, margin = x, v
    # local curvature psi''/2 for the bottleneck estimate
    h = min(1e-4, x_min / 2, (top - x_min) / 2) or 1e-8
    curv = (gap(x_min + h) - 2 * gap(x_min) + gap(x_min - h)) / (2 * h * h)
    return x_min, margin, curv


def is_supercritical(
    spec: TreeSpec,
    theta: int,
    p: float,
    tol: Tolerances = DEFAULT,
    cross_check: bool = True,
) -> tuple[bool, ScanCertificate]:
    """Whether psi(x) > x on (0, 1 - delta], i.e. the limits are all 1.

    With ``cross_check`` the fixed-point iteration is run as well.
    A contradiction raises ``CriterionDisagreement``. An iteration that hits
    the cap below 1 while the scan says supercritical is tolerated only when
    the margin is small enough that crossing the bottleneck near the
    tangency point should take about as long as the cap allows; a margin
    below ``eps_fp`` makes the iteration's stopping rule uninformative and
    the check is recorded as inconclusive.
    """
    spec.require_strict(theta)
    p = probability(p, "p")
    off = np.asarray(spec.offspring, dtype=np.int64)
    x_min, margin, curv = _scan(off, theta, p, tol)
    supercritical = margin > 0.0
    if not cross_check:
        return supercritical, ScanCertificate(x_min, margin)

    lim = iterate_to_limit(spec, theta, p, tol)
    if lim.is_full(tol.eps_one):
        verdict = "full"
    elif not lim.converged:
        verdict = "stalled"
    elif supercritical and margin < spec.period * tol.eps_fp:
        # every period moves class 0 by at least the margin, so a margin
        # below eps_fp lets the stopping rule fire inside the bottleneck
        verdict = "inconclusive"
    else:
        verdict = "partial"

    bottleneck = None
    if supercritical:
        if curv > 0:
            bottleneck = spec.period * math.pi / math.sqrt(margin * curv)
        else:
            bottleneck = spec.period / margin
    cert = ScanCertificate(x_min, margin, lim, verdict, bottleneck)

    where = f"spec={spec} theta={theta} p={p!r}"
    if supercritical and verdict == "partial":
        raise CriterionDisagreement(
            f"{where}: scan margin {margin:.3e} > 0 but iteration settled at {lim.limits}"
        )
    if not supercritical and verdict == "full":
        raise CriterionDisagreement(
            f"{where}: scan margin {margin:.3e} <= 0 but iteration reached 1"
        )
    if supercritical and verdict == "stalled" and bottleneck * tol.stall_factor < tol.max_iter:
        raise CriterionDisagreement(
            f"{where}: iteration stalled at {lim.limits} after {lim.iterations} steps, "
            f"predicted passage {bottleneck:.3g} steps"
        )
    return supercritical, cert


def _is_full_by_iteration(spec, theta, p, tol):
    lim = iterate_to_limit(spec, theta, p, tol)
    full = lim.is_full(tol.eps_one)
    verdict = "full" if full else ("partial" if lim.converged else "stalled")
    return full, ScanCertificate(math.nan, math.nan, lim, verdict)


@dataclass(frozen=True)
class ThresholdResult:
    p_low: float  # largest tested p classified subcritical
    p_high: float  # smallest tested p classified supercritical
    criterion: Criterion
    evaluations: int
    stalled: int = 0  # evaluations where the iteration cross-check was inconclusive
    low_cert: ScanCertificate | None = field(default=None, compare=False, repr=False)
    high_cert: ScanCertificate | None = field(default=None, compare=False, repr=False)

    @property
    def p_est(self) -> float:
        return 0.5 * (self.p_low + self.p_high)

    @property
    def width(self) -> float:
        return self.p_high - self.p_low


def sandwich_bounds(spec: TreeSpec, theta: int, widen: float = 1e-6) -> tuple[float, float]:
    """Bracket for p_f from the regular trees with the extreme offspring counts.

    More children make activation easier, so the largest count gives the
    lower end.
    """
    spec.require_strict(theta)
    lo = find_pc_regular(max(spec.offspring), theta).p_c
    hi = find_pc_regular(min(spec.offspring), theta).p_c
    return max(0.0, lo - widen), min(1.0, hi + widen)


def find_pf(
    spec: TreeSpec,
    theta: int,
    tol: Tolerances = DEFAULT,
    criterion: Criterion | str = Criterion.BOTH,
) -> ThresholdResult:
    """Bisect for the full-activation threshold until the bracket is ``tol.eps_p`` wide.

    The midpoint itself is never classified; only the bracket ends are.
    """
    spec.require_strict(theta)
    criterion = Criterion(criterion)
    if criterion is Criterion.ITERATION:
        def classify(p):
            return _is_full_by_iteration(spec, theta, p, tol)
    else:
        cross = criterion is Criterion.BOTH

        def classify(p):
            return is_supercritical(spec, theta, p, tol, cross_check=cross)

    lo, hi = sandwich_bounds(spec, theta)
    evaluations = 0
    stalled = 0

    def run(p):
        nonlocal evaluations, stalled
        evaluations += 1
        flag, cert = classify(p)
        stalled += cert.verdict in ("stalled", "inconclusive")
        return flag, cert

    lo_flag, lo_cert = run(lo)
    hi_flag, hi_cert = run(hi)
    if lo_flag or not hi_flag:
        raise RuntimeError(
            f"sandwich bracket [{lo}, {hi}] does not straddle p_f for spec={spec} theta={theta}"
        )
    while hi - lo > tol.eps_p:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        flag, cert = run(mid)
        if flag:
            hi, hi_cert = mid, cert
        else:
            lo, lo_cert = mid, cert
    if criterion is Criterion.BOTH and stalled:
        # some classifications rested on the scan alone
        criterion = Criterion.ROOT_SCAN
    return ThresholdResult(lo, hi, criterion, evaluations, stalled, lo_cert, hi_cert)


# --------------------------------------------------------------------------
# unoriented two-periodic tree


@dataclass(frozen=True)
class UnorientedLimits:
    x_inf: float  # node of degree a + 1
    y_inf: float  # node of degree b + 1
    x_oriented: float
    y_oriented: float


def unoriented_limits(
    a: int, b: int, theta: int, p: float, tol: Tolerances = DEFAULT
) -> UnorientedLimits:
    """Activation probabilities of the unoriented tree from the oriented limits.

    A node of degree a + 1 has a + 1 neighbours, each the root of an oriented
    subtree of the other class, so its probability is phi_{a+1} applied to the
    oriented limit of that class.
    """
    spec = TreeSpec((a, b))
    spec.require_strict(theta)
    p = probability(p, "p")
    lim = iterate_to_limit(spec, theta, p, tol)
    if not lim.converged:
        raise ConvergenceError(
            f"oriented limits for ({a},{b}) theta={theta} p={p!r} did not converge "
            f"(residual {lim.residual:.3e} after {lim.iterations} steps)"
        )
    x_or, y_or = lim.limits
    x_inf = p + (1.0 - p) * binom_tail(a + 1, theta, y_or)
    y_inf = p + (1.0 - p) * binom_tail(b + 1, theta, x_or)
    return UnorientedLimits(x_inf, y_inf, x_or, y_or)
