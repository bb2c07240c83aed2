"""Oriented-tree recurrence for l-periodic trees.

Entry ``k`` of the state is the probability that a node of in-degree
``m_k`` is active; its in-neighbours all belong to class ``(k + 1) % l``.
Starting from the all-``p`` state, one step maps

    state[k] <- phi_{m_k}(state[(k + 1) % l])

and after ``t`` steps entry 0 is the root-activation probability of the
depth-``t`` oriented truncation with frozen leaves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from perctree import _kernels
from perctree.config import DEFAULT, Tolerances
from perctree.core import TreeSpec, probability


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class OrientedState:
    t: int
    probs: tuple[float, ...]

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        object.__setattr__(self, "probs", tuple(probability(v) for v in self.probs))

    @classmethod
    def initial(cls, spec: TreeSpec, p: float) -> OrientedState:
        return cls(0, (probability(p, "p"),) * spec.period)


@dataclass(frozen=True)
class LimitResult:
    limits: tuple[float, ...]
    iterations: int
    converged: bool
    residual: float

    def is_full(self, eps_one: float = DEFAULT.eps_one) -> bool:
        return all(v > 1.0 - eps_one for v in self.limits)


def check_theta(spec: TreeSpec, theta: int, relaxed: bool = False) -> None:
    """Default needs 2 <= theta <= min(m); relaxed mode only theta >= 2.

    Classes with theta > m_k can only be active initially. The threshold
    search additionally requires theta < min(m).
    """
    if theta < 2:
        raise ValueError(f"theta={theta} must be >= 2")
    if not relaxed and theta > min(spec.offspring):
        raise ValueError(
            f"theta={theta} exceeds min(offspring)={min(spec.offspring)}; pass relaxed=True"
        )


def _offspring(spec: TreeSpec) -> np.ndarray:
    return np.asarray(spec.offspring, dtype=np.int64)


def step(
    spec: TreeSpec, theta: int, p: float, state: OrientedState, relaxed: bool = False
) -> OrientedState:
    check_theta(spec, theta, relaxed)
    if len(state.probs) != spec.period:
        raise ValueError(f"state has {len(state.probs)} classes, spec has {spec.period}")
    p = probability(p, "p")
    new = _kernels.step(_offspring(spec), theta, p, np.asarray(state.probs, dtype=float))
    return OrientedState(state.t + 1, tuple(new.tolist()))


def trajectory(
    spec: TreeSpec, theta: int, p: float, steps: int, relaxed: bool = False
) -> np.ndarray:
    """States for t = 0..steps as a ``(steps + 1, l)`` array."""
    check_theta(spec, theta, relaxed)
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    return _kernels.trajectory(_offspring(spec), theta, probability(p, "p"), steps)


def root_probability(
    spec: TreeSpec, theta: int, p: float, depth: int, relaxed: bool = False
) -> float:
    """x_t for t = depth: root activation in the depth-t oriented truncation."""
    return float(trajectory(spec, theta, p, depth, relaxed)[depth, 0])


def iterate_to_limit(
    spec: TreeSpec,
    theta: int,
    p: float,
    tol: Tolerances = DEFAULT,
    relaxed: bool = False,
) -> LimitResult:
    """Iterate from the all-p state until no entry moves by ``tol.eps_fp``.

    Hitting ``tol.max_iter`` is reported through ``converged=False`` rather
    than raised; near the threshold the approach to the limit is sublinear.
    """
    check_theta(spec, theta, relaxed)
    p = probability(p, "p")
    limits, iters, residual = _kernels.iterate(
        _offspring(spec), theta, p, tol.eps_fp, tol.max_iter
    )
    return LimitResult(
        limits=tuple(float(v) for v in limits),
        iterations=int(iters),
        converged=bool(residual < tol.eps_fp),
        residual=float(residual),
    )


def composite_map(
    spec: TreeSpec, theta: int, p: float, class_index: int, x: float, relaxed: bool = False
) -> float:
    """One full period of the recurrence seen from class ``class_index``.

    psi_k = phi_{m_k} o phi_{m_{k+1}} o ... o phi_{m_{k+l-1}} (indices mod l).
    """
    check_theta(spec, theta, relaxed)
    if not 0 <= class_index < spec.period:
        raise IndexError(f"class_index {class_index} outside [0, {spec.period})")
    return float(
        _kernels.composite(
            _offspring(spec), class_index, theta, probability(p, "p"), probability(x, "x")
        )
    )
