"""Threshold sweeps over (a, b, theta) grids and their CSV/JSON tables."""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterable, Iterator

from perctree.config import DEFAULT
from perctree.core import TreeSpec
from perctree.threshold import find_pf

B_RULES = ("equal", "plus1", "plus2", "double", "explicit")
PAIR_HEADER = ("a", "b", "theta", "p_low", "p_high", "p_est", "evaluations", "wall_ms")
GENERAL_HEADER = ("degrees", "theta", "p_low", "p_high", "p_est", "evaluations", "wall_ms")


def fmt(value: float) -> str:
    return format(float(value), ".12g")


@dataclass(frozen=True)
class SweepConfig:
    a_range: tuple[int, int] = (3, 10)  # inclusive
    b_rule: str = "equal"
    theta_range: tuple[int, int] = (2, 9)  # inclusive
    b_values: tuple[int, ...] = ()  # used by b_rule="explicit"
    specs: tuple[tuple[int, ...], ...] = ()  # general-l sweep; overrides a_range/b_rule
    eps_p: float = DEFAULT.eps_p
    output_path: str | None = None
    format: str = "csv"
    jobs: int = field(default_factory=lambda: os.cpu_count() or 1)

    def __post_init__(self):
        object.__setattr__(self, "a_range", tuple(int(v) for v in self.a_range))
        object.__setattr__(self, "theta_range", tuple(int(v) for v in self.theta_range))
        object.__setattr__(self, "b_values", tuple(int(v) for v in self.b_values))
        object.__setattr__(self, "specs", tuple(tuple(int(m) for m in s) for s in self.specs))
        for name in ("a_range", "theta_range"):
            rng = getattr(self, name)
            if len(rng) != 2 or rng[0] > rng[1]:
                raise ValueError(f"{name} must be a nonempty [lo, hi] range, got {rng}")
        if self.b_rule not in B_RULES:
            raise ValueError(f"b_rule must be one of {B_RULES}, got {self.b_rule!r}")
        if self.b_rule == "explicit" and not self.b_values and not self.specs:
            raise ValueError("b_rule='explicit' needs b_values")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        if not self.eps_p > 0:
            raise ValueError("eps_p must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> SweepConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str, **overrides) -> SweepConfig:
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)

    def override(self, **changes) -> SweepConfig:
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    @property
    def general(self) -> bool:
        return bool(self.specs)

    def b_for(self, a: int) -> tuple[int, ...]:
        return {
            "equal": (a,),
            "plus1": (a + 1,),
            "plus2": (a + 2,),
            "double": (2 * a,),
            "explicit": self.b_values,
        }[self.b_rule]

    def cells(self) -> Iterator[tuple[tuple[int, ...], int]]:
        """(degrees, theta) in output order: by theta, then a, then b."""
        thetas = range(self.theta_range[0], self.theta_range[1] + 1)
        if self.general:
            for theta in thetas:
                for spec in self.specs:
                    yield spec, theta
            return
        for theta in thetas:
            for a in range(self.a_range[0], self.a_range[1] + 1):
                for b in self.b_for(a):
                    yield (a, b), theta


@dataclass(frozen=True)
class SweepRow:
    degrees: tuple[int, ...]
    theta: int
    p_low: float | None
    p_high: float | None
    p_est: float | None
    evaluations: int
    wall_ms: float

    @property
    def skipped(self) -> bool:
        return self.p_est is None


def evaluate_cell(degrees: tuple[int, ...], theta: int, eps_p: float = DEFAULT.eps_p) -> SweepRow:
    """One sweep cell; cells outside strict mode come back as skipped rows."""
    spec = TreeSpec(degrees)
    if not spec.is_strict(theta):
        return SweepRow(spec.offspring, theta, None, None, None, 0, 0.0)
    start = time.perf_counter()
    res = find_pf(spec, theta, DEFAULT.with_(eps_p=eps_p))
    wall_ms = (time.perf_counter() - start) * 1e3
    return SweepRow(spec.offspring, theta, res.p_low, res.p_high, res.p_est, res.evaluations, wall_ms)


def _cell(args):
    return evaluate_cell(*args)


def run_sweep(config: SweepConfig) -> list[SweepRow]:
    tasks = [(deg, theta, config.eps_p) for deg, theta in config.cells()]
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(_cell, tasks))
    return [_cell(t) for t in tasks]


def monotonicity_warnings(rows: Iterable[SweepRow], tol: float = 1e-7) -> list[str]:
    """Ordering violations: p_f should not increase when a degree grows
    (coordinate-wise, same theta) and should not decrease when theta grows."""
    done = [r for r in rows if not r.skipped]
    by_key = {(r.degrees, r.theta): r for r in done}
    out = []
    for r in done:
        up = by_key.get((r.degrees, r.theta + 1))
        if up is not None and up.p_est < r.p_est - tol:
            out.append(f"p_est decreases from theta={r.theta} to {r.theta + 1} at degrees={r.degrees}")
    same_theta: dict[int, list[SweepRow]] = {}
    for r in done:
        same_theta.setdefault(r.theta, []).append(r)
    for theta, group in same_theta.items():
        for r in group:
            for s in group:
                if (
                    len(s.degrees) == len(r.degrees)
                    and s.degrees != r.degrees
                    and all(y >= x for x, y in zip(r.degrees, s.degrees))
                    and s.p_est > r.p_est + tol
                ):
                    out.append(
                        f"p_est increases from degrees={r.degrees} to {s.degrees} at theta={theta}"
                    )
    return out


# --------------------------------------------------------------------------
# tables


def _is_pair_table(rows: list[SweepRow]) -> bool:
    return bool(rows) and all(len(r.degrees) == 2 for r in rows)


def _record(row: SweepRow, pair: bool) -> dict[str, str]:
    def opt(v):
        return "" if v is None else fmt(v)

    rec = {}
    if pair:
        rec["a"], rec["b"] = str(row.degrees[0]), str(row.degrees[1])
    else:
        rec["degrees"] = ";".join(str(m) for m in row.degrees)
    rec.update(
        theta=str(row.theta),
        p_low=opt(row.p_low),
        p_high=opt(row.p_high),
        p_est=opt(row.p_est),
        evaluations=str(row.evaluations),
        wall_ms=fmt(row.wall_ms),
    )
    return rec


def rows_to_csv(rows: list[SweepRow], pair: bool | None = None) -> str:
    pair = _is_pair_table(rows) if pair is None else pair
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=PAIR_HEADER if pair else GENERAL_HEADER, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(_record(row, pair))
    return buf.getvalue()


def rows_from_csv(text: str) -> list[SweepRow]:
    reader = csv.DictReader(io.StringIO(text))
    header = tuple(reader.fieldnames or ())
    if header not in (PAIR_HEADER, GENERAL_HEADER):
        raise ValueError(f"unrecognised header {header}")
    rows = []
    for rec in reader:
        if "degrees" in rec:
            degrees = tuple(int(m) for m in rec["degrees"].split(";"))
        else:
            degrees = (int(rec["a"]), int(rec["b"]))

        def opt(key):
            return float(rec[key]) if rec[key] != "" else None

        rows.append(
            SweepRow(
                degrees, int(rec["theta"]), opt("p_low"), opt("p_high"), opt("p_est"),
                int(rec["evaluations"]), float(rec["wall_ms"]),
            )
        )
    return rows


def rows_to_json(rows: list[SweepRow]) -> str:
    def num(v):
        return None if v is None else float(fmt(v))

    out = []
    for r in rows:
        rec = asdict(r)
        rec["degrees"] = list(r.degrees)
        for key in ("p_low", "p_high", "p_est", "wall_ms"):
            rec[key] = num(rec[key])
        rec["skipped"] = r.skipped
        out.append(rec)
    return json.dumps(out, indent=2) + "\n"
