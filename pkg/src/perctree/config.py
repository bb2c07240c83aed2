from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """Numerical knobs for the fixed-point and threshold solvers."""

    eps_fp: float = 1e-13  # stop iterating when no entry moves by this much
    max_iter: int = 1_000_000
    eps_one: float = 1e-9  # "equals 1" for reporting only
    eps_p: float = 1e-9  # width of returned p brackets
    scan_grid: int = 10_000
    scan_delta: float = 1e-12  # excluded strip below x = 1
    refine_width: float = 1e-12
    # a stalled iteration is only blamed if the predicted bottleneck passage is
    # this many times shorter than the iteration cap
    stall_factor: float = 10.0

    def with_(self, **changes) -> Tolerances:
        return replace(self, **changes)


DEFAULT = Tolerances()
