"""Bootstrap percolation thresholds on periodic trees."""

from perctree.config import DEFAULT, Tolerances
from perctree.core import (
    PhiParams,
    TreeSpec,
    big_phi,
    binom_lower_tail,
    binom_tail,
    phi,
    phi_prime,
    phi_prime_stationary_x,
    phi_second,
    probability,
)
from perctree.recurrence import (
    ConvergenceError,
    LimitResult,
    OrientedState,
    composite_map,
    iterate_to_limit,
    root_probability,
    step,
    trajectory,
)
from perctree.simulate import (
    BPRun,
    MCEstimate,
    Orientation,
    TruncatedTree,
    build_truncated,
    exact_root_activation,
    mc_root_activation,
    run_bp,
)
from perctree.threshold import (
    Criterion,
    CriterionDisagreement,
    TangencyResult,
    ThresholdResult,
    UnorientedLimits,
    count_roots,
    find_pc_regular,
    find_pf,
    is_supercritical,
    sandwich_bounds,
    unoriented_limits,
)

__version__ = "0.1.0"
