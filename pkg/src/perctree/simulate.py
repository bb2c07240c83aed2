"""Bootstrap percolation on finite truncations of periodic trees.

Trees are stored as flat arrays in breadth-first order, so the children of a
node are contiguous and every level is a contiguous block of nodes sharing
the same class. Leaves keep their initial state: in the oriented tree they
have no in-neighbours, and in the unoriented tree their single neighbour is
below any threshold theta >= 2.

Two engines implement the same synchronous rule:

* ``run_bp`` runs one configuration, re-examining only nodes next to a
  newly activated node;
* ``_run_packed`` runs many configurations at once, one per bit of a
  ``uint64`` word, and backs exact enumeration and Monte Carlo.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from perctree.core import TreeSpec, probability

MAX_NODES = 10**8
MAX_ENUM_NODES = 24
MC_BATCH = 1 << 15
RNG_ALGORITHM = f"philox4x64/SeedSequence(seed,spawn_key=(batch,))/batch={MC_BATCH}"

_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


class Orientation(str, enum.Enum):
    ORIENTED = "oriented"
    UNORIENTED = "unoriented"


class TreeTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TruncatedTree:
    spec: TreeSpec
    depth_limit: int
    orientation: Orientation
    class_index: np.ndarray
    parent: np.ndarray  # -1 at the root
    child_start: np.ndarray
    child_count: np.ndarray
    depth: np.ndarray
    level_offsets: np.ndarray  # level d occupies [level_offsets[d], level_offsets[d + 1])
    full_root: bool = False
    root: int = 0

    @property
    def n_nodes(self) -> int:
        return int(self.level_offsets[-1])

    def __len__(self) -> int:
        return self.n_nodes

    def children(self, node: int) -> range:
        start = int(self.child_start[node])
        return range(start, start + int(self.child_count[node]))

    def level(self, d: int) -> slice:
        return slice(int(self.level_offsets[d]), int(self.level_offsets[d + 1]))

    def fanout(self, d: int) -> int:
        """Children per node on level d (0 on the last level)."""
        if d >= self.depth_limit:
            return 0
        m = self.spec.offspring[d % self.spec.period]
        return m + 1 if (d == 0 and self.full_root) else m


def level_sizes(spec: TreeSpec, depth: int, full_root: bool = False) -> list[int]:
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    sizes = [1]
    total = 1
    for d in range(depth):
        m = spec.offspring[d % spec.period] + (1 if d == 0 and full_root else 0)
        sizes.append(sizes[-1] * m)
        total += sizes[-1]
        if total > MAX_NODES:
            raise TreeTooLarge(f"truncation of {spec} at depth {depth} exceeds {MAX_NODES} nodes")
    return sizes


def build_truncated(
    spec: TreeSpec,
    depth: int,
    orientation: Orientation | str = Orientation.ORIENTED,
    full_root: bool = False,
) -> TruncatedTree:
    """Depth-``depth`` truncation, root at depth 0 with class 0.

    ``full_root`` gives the root ``m_0 + 1`` children so that it has the
    degree of an interior node of the infinite tree; by default it has
    ``m_0``, like every other node of its class.
    """
    orientation = Orientation(orientation)
    sizes = level_sizes(spec, depth, full_root)
    offsets = np.concatenate(([0], np.cumsum(sizes))).astype(np.int64)
    n = int(offsets[-1])
    idx_dtype = np.int32 if n < 2**31 else np.int64

    class_index = np.empty(n, dtype=np.int16)
    depth_arr = np.empty(n, dtype=np.int16)
    parent = np.empty(n, dtype=idx_dtype)
    child_start = np.zeros(n, dtype=np.int64)
    child_count = np.zeros(n, dtype=np.int32)
    parent[0] = -1
    for d in range(depth + 1):
        lo, hi = offsets[d], offsets[d + 1]
        class_index[lo:hi] = d % spec.period
        depth_arr[lo:hi] = d
        if d < depth:
            c = sizes[d + 1] // sizes[d]
            child_count[lo:hi] = c
            child_start[lo:hi] = offsets[d + 1] + c * np.arange(hi - lo, dtype=np.int64)
            parent[offsets[d + 1] : offsets[d + 2]] = np.repeat(
                np.arange(lo, hi, dtype=idx_dtype), c
            )
    return TruncatedTree(
        spec, depth, orientation, class_index, parent, child_start, child_count,
        depth_arr, offsets, full_root,
    )


# --------------------------------------------------------------------------
# single run


@dataclass(frozen=True, eq=False)
class BPRun:
    initial: np.ndarray
    final: np.ndarray
    rounds: int


def _child_indices(tree: TruncatedTree, nodes: np.ndarray) -> np.ndarray:
    counts = tree.child_count[nodes]
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    starts = np.repeat(tree.child_start[nodes], counts)
    first = np.repeat(np.cumsum(counts) - counts, counts)
    return starts + (np.arange(total) - first)


def _receivers(tree: TruncatedTree, nodes: np.ndarray) -> np.ndarray:
    """Nodes that count ``nodes`` among their active neighbours (with multiplicity)."""
    par = tree.parent[nodes]
    out = par[par >= 0].astype(np.int64)
    if tree.orientation is Orientation.UNORIENTED:
        out = np.concatenate((out, _child_indices(tree, nodes)))
    return out


def run_bp(tree: TruncatedTree, initial: np.ndarray, theta: int) -> BPRun:
    """Synchronous bootstrap percolation from ``initial`` until stable."""
    initial = np.asarray(initial, dtype=bool)
    if initial.shape != (tree.n_nodes,):
        raise ValueError(f"initial has shape {initial.shape}, tree has {tree.n_nodes} nodes")
    if theta < 1:
        raise ValueError("theta must be >= 1")
    active = initial.copy()
    count = np.zeros(tree.n_nodes, dtype=np.int32)
    np.add.at(count, _receivers(tree, np.flatnonzero(active)), 1)
    candidates = np.arange(tree.n_nodes)
    rounds = 0
    while True:
        fresh = candidates[~active[candidates] & (count[candidates] >= theta)]
        if fresh.size == 0:
            break
        active[fresh] = True
        rounds += 1
        touched = _receivers(tree, fresh)
        np.add.at(count, touched, 1)
        candidates = np.unique(touched)
    return BPRun(initial, active, rounds)


# --------------------------------------------------------------------------
# bit-parallel runs


def _at_least(inputs: list[np.ndarray], theta: int) -> np.ndarray:
    # acc[j]: at least j + 1 of the inputs seen so far are set
    acc = [np.zeros_like(inputs[0]) for _ in range(theta)]
    for b in inputs:
        for j in range(theta - 1, 0, -1):
            acc[j] |= acc[j - 1] & b
        acc[0] |= b
    return acc[theta - 1]


def _run_packed(tree: TruncatedTree, state: np.ndarray, theta: int) -> np.ndarray:
    """Run every bit column of ``state`` (shape ``(n_nodes, words)``) to stability."""
    unoriented = tree.orientation is Orientation.UNORIENTED
    n_words = state.shape[1]
    while True:
        new = state.copy()
        for d in range(tree.depth_limit + 1):
            here = tree.level(d)
            n_d = here.stop - here.start
            inputs = []
            c = tree.fanout(d)
            if c:
                kids = state[tree.level(d + 1)].reshape(n_d, c, n_words)
                inputs.extend(kids[:, j] for j in range(c))
            if unoriented and d > 0:
                inputs.append(np.repeat(state[tree.level(d - 1)], tree.fanout(d - 1), axis=0))
            if len(inputs) >= theta:
                new[here] |= _at_least(inputs, theta)
        if np.array_equal(new, state):
            return state
        state = new


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack a boolean ``(rows, k)`` array into ``(rows, ceil(k / 64))`` uint64 words."""
    rows, k = bits.shape
    pad = (-k) % 64
    if pad:
        bits = np.concatenate((bits, np.zeros((rows, pad), dtype=bool)), axis=1)
    return np.packbits(bits, axis=1, bitorder="little").view(np.uint64)


def _enumeration_state(n: int) -> np.ndarray:
    """Row i holds bit i of every configuration index 0..2^n - 1."""
    n_words = max(1, (1 << n) // 64)
    state = np.empty((n, n_words), dtype=np.uint64)
    positions = np.arange(64, dtype=np.uint64)
    words = np.arange(n_words, dtype=np.uint64)
    for i in range(n):
        if i < 6:
            mask = ((positions >> np.uint64(i)) & np.uint64(1)).astype(bool)
            state[i] = np.uint64(np.sum(np.uint64(1) << positions[mask]))
        else:
            state[i] = np.where((words >> np.uint64(i - 6)) & np.uint64(1), _ONES, np.uint64(0))
    return state


@lru_cache(maxsize=128)
def activation_counts(
    spec: TreeSpec,
    theta: int,
    depth: int,
    orientation: Orientation | str = Orientation.ORIENTED,
    full_root: bool = False,
) -> tuple[int, ...]:
    """Number of initial configurations with k active nodes whose root ends active.

    Entry k of the result counts configurations with exactly k initially
    active nodes, over all 2^N configurations of the N-node truncation.
    """
    tree = build_truncated(spec, depth, orientation, full_root)
    n = tree.n_nodes
    if n > MAX_ENUM_NODES:
        raise TreeTooLarge(f"{n} nodes; exact enumeration is limited to {MAX_ENUM_NODES}")
    final = _run_packed(tree, _enumeration_state(n), theta)
    root_bits = np.unpackbits(final[0].view(np.uint8), bitorder="little")[: 1 << n]
    configs = np.flatnonzero(root_bits).astype(np.uint64)
    counts = np.bincount(np.bitwise_count(configs), minlength=n + 1)
    return tuple(int(c) for c in counts)


def exact_root_activation(
    spec: TreeSpec,
    theta: int,
    p: float,
    depth: int,
    orientation: Orientation | str = Orientation.ORIENTED,
    full_root: bool = False,
) -> float:
    """Probability that the root ends active, summed over all initial configurations."""
    p = probability(p, "p")
    counts = activation_counts(spec, theta, depth, Orientation(orientation), full_root)
    n = len(counts) - 1
    return math.fsum(c * p**k * (1.0 - p) ** (n - k) for k, c in enumerate(counts) if c)


# --------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int
    rng: str = RNG_ALGORITHM

    @classmethod
    def from_hits(cls, hits: int, trials: int, seed: int) -> MCEstimate:
        mean = hits / trials
        return cls(mean, math.sqrt(mean * (1.0 - mean) / trials), trials, seed)


def _batch_hits(args) -> int:
    spec, theta, p, depth, orientation, full_root, seed, batch, size = args
    tree = build_truncated(spec, depth, orientation, full_root)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(batch,))))
    initial = rng.random((tree.n_nodes, size)) < p
    final = _run_packed(tree, _pack(initial), theta)
    return int(np.bitwise_count(final[0]).sum())


def mc_root_activation(
    spec: TreeSpec,
    theta: int,
    p: float,
    depth: int,
    orientation: Orientation | str = Orientation.ORIENTED,
    trials: int = 100_000,
    seed: int = 0,
    jobs: int = 1,
    full_root: bool = False,
) -> MCEstimate:
    """Fraction of i.i.d. Bernoulli(p) initial configurations whose root ends active.

    Trials are split into fixed batches, each seeded from ``(seed, batch)``,
    so the estimate does not depend on ``jobs``.
    """
    if trials < 100:
        raise ValueError("trials must be >= 100")
    if theta < 1:
        raise ValueError("theta must be >= 1")
    p = probability(p, "p")
    orientation = Orientation(orientation)
    level_sizes(spec, depth, full_root)  # size check before spawning work
    tasks = []
    for batch, start in enumerate(range(0, trials, MC_BATCH)):
        size = min(MC_BATCH, trials - start)
        tasks.append((spec, theta, p, depth, orientation, full_root, seed, batch, size))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            hits = sum(pool.map(_batch_hits, tasks))
    else:
        hits = sum(map(_batch_hits, tasks))
    return MCEstimate.from_hits(hits, trials, seed)
