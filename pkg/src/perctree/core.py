"""Binomial tails, the one-level activation map and its derivatives.

The activation map for a node with ``n`` in-neighbours, threshold ``theta``
and initial density ``p`` is

    phi(x) = p + (1 - p) * P(Bin(n, x) >= theta)

i.e. the probability that the node ends up active when each in-neighbour is
independently active with probability ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from perctree import _kernels

MAX_DEGREE = 64
PROB_SLACK = 1e-12


def probability(value: float, name: str = "probability") -> float:
    """Validate ``value`` as a probability, clamping ulp-level drift.

    Values within ``PROB_SLACK`` outside [0, 1] are clamped; anything further
    out raises ``ValueError``.
    """
    v = float(value)
    if math.isnan(v):
        raise ValueError(f"{name} is NaN")
    if v < 0.0:
        if v < -PROB_SLACK:
            raise ValueError(f"{name}={value!r} is below 0")
        return 0.0
    if v > 1.0:
        if v > 1.0 + PROB_SLACK:
            raise ValueError(f"{name}={value!r} is above 1")
        return 1.0
    return v


@dataclass(frozen=True)
class TreeSpec:
    """An l-periodic tree: nodes at depth k have ``offspring[k % l]`` children."""

    offspring: tuple[int, ...]

    def __post_init__(self):
        offspring = tuple(int(m) for m in self.offspring)
        object.__setattr__(self, "offspring", offspring)
        if not offspring:
            raise ValueError("offspring list must be nonempty")
        for m in offspring:
            if m < 1:
                raise ValueError(f"offspring counts must be >= 1, got {m}")
            if m > MAX_DEGREE:
                raise ValueError(f"offspring count {m} exceeds the cap of {MAX_DEGREE}")

    @property
    def period(self) -> int:
        return len(self.offspring)

    @classmethod
    def parse(cls, text: str) -> TreeSpec:
        """Parse ``"m0,m1,...,m{l-1}"``."""
        try:
            values = [int(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
        except ValueError as exc:
            raise ValueError(f"bad degree list {text!r}") from exc
        return cls(tuple(values))

    @classmethod
    def regular(cls, m: int) -> TreeSpec:
        return cls((m,))

    def rotated(self, k: int) -> TreeSpec:
        k %= self.period
        return TreeSpec(self.offspring[k:] + self.offspring[:k])

    def is_strict(self, theta: int) -> bool:
        """Whether ``2 <= theta < min(offspring)``, where the analytic results hold."""
        return 2 <= theta < min(self.offspring)

    def require_strict(self, theta: int) -> None:
        if not self.is_strict(theta):
            raise ValueError(
                f"theta={theta} must satisfy 2 <= theta < min(offspring)={min(self.offspring)}"
            )

    def __str__(self) -> str:
        return ",".join(str(m) for m in self.offspring)


@dataclass(frozen=True)
class PhiParams:
    """Parameters ``(n, theta, p)`` of the activation map."""

    n: int
    theta: int
    p: float

    def __post_init__(self):
        if self.n < 1 or self.n > MAX_DEGREE:
            raise ValueError(f"n={self.n} outside [1, {MAX_DEGREE}]")
        if not 2 <= self.theta <= self.n:
            raise ValueError(f"theta={self.theta} outside [2, n={self.n}]")
        object.__setattr__(self, "p", probability(self.p, "p"))

    @property
    def tangency_ok(self) -> bool:
        return self.theta <= self.n - 1


def binom_tail(n: int, theta: int, x: float) -> float:
    """P(Bin(n, x) >= theta); 1 for theta <= 0 and 0 for theta > n."""
    if theta <= 0:
        return 1.0
    if theta > n:
        return 0.0
    return _kernels.tail(n, theta, probability(x, "x"))


def binom_lower_tail(n: int, theta: int, x: float) -> float:
    """P(Bin(n, x) <= theta - 1), summed with the same recurrence as the tail."""
    if theta <= 0:
        return 0.0
    if theta > n:
        return 1.0
    return _kernels.pmf_sum(n, 0, theta - 1, probability(x, "x"))


def phi(params: PhiParams, x: float) -> float:
    return _kernels.phi(params.n, params.theta, params.p, probability(x, "x"))


def big_phi(params: PhiParams, x: float) -> float:
    """phi(x) - x; zero at x = 1, equal to p at x = 0."""
    x = probability(x, "x")
    return _kernels.phi(params.n, params.theta, params.p, x) - x


def _slope_factor(n: int, theta: int) -> float:
    return n * math.comb(n - 1, theta - 1)


def phi_prime(params: PhiParams, x: float) -> float:
    """d phi / dx = (1-p) n C(n-1, theta-1) x^(theta-1) (1-x)^(n-theta)."""
    n, theta, p = params.n, params.theta, params.p
    x = probability(x, "x")
    return (1.0 - p) * _slope_factor(n, theta) * x ** (theta - 1) * (1.0 - x) ** (n - theta)


def phi_second(params: PhiParams, x: float) -> float:
    """d^2 phi / dx^2; changes sign only at the stationary point of phi'."""
    n, theta, p = params.n, params.theta, params.p
    x = probability(x, "x")
    if theta == n:
        # (1-x)^0 factor; avoid the (1-x)^-1 form below
        return (1.0 - p) * n * (n - 1) * x ** (n - 2) if n >= 2 else 0.0
    return (
        (1.0 - p)
        * _slope_factor(n, theta)
        * x ** (theta - 2)
        * (1.0 - x) ** (n - theta - 1)
        * (theta - 1 - (n - 1) * x)
    )


def phi_prime_stationary_x(n: int, theta: int) -> float:
    """Argmax of phi' over (0, 1): (theta - 1) / (n - 1)."""
    if not 2 <= theta <= n - 1:
        raise ValueError(f"stationary point needs 2 <= theta <= n-1, got n={n}, theta={theta}")
    return (theta - 1) / (n - 1)
