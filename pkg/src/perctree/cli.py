"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage/config error,
3 criterion disagreement, 4 simulation z-score breach.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from perctree.config import DEFAULT
from perctree.core import PhiParams, TreeSpec, big_phi, phi, phi_prime
from perctree.recurrence import root_probability
from perctree.simulate import Orientation, mc_root_activation
from perctree.sweep import SweepConfig, fmt, monotonicity_warnings, rows_to_csv, rows_to_json, run_sweep
from perctree.threshold import Criterion, CriterionDisagreement, find_pf
from perctree.verify import GROUPS, run_checks

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_DISAGREE, EXIT_ZSCORE = 0, 1, 2, 3, 4
Z_LIMIT = 5.0


class UsageError(Exception):
    pass


def _range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        return (int(lo), int(hi)) if sep else (int(lo), int(lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def _spec(text: str) -> TreeSpec:
    try:
        return TreeSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _default_seed() -> int:
    raw = os.environ.get("PERCTREE_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"PERCTREE_SEED={raw!r} is not an integer") from None


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(record: dict, fmt_name: str) -> str:
    if fmt_name == "json":
        return json.dumps(record, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(record), lineterminator="\n")
    writer.writeheader()
    writer.writerow({k: fmt(v) if isinstance(v, float) else v for k, v in record.items()})
    return buf.getvalue()


def _json_num(v: float) -> float:
    return float(fmt(v)) if math.isfinite(v) else v


# --------------------------------------------------------------------------
# commands


def cmd_threshold(args) -> int:
    spec = args.degrees
    if not spec.is_strict(args.theta):
        raise UsageError(
            f"theta={args.theta} must satisfy 2 <= theta < min(degrees)={min(spec.offspring)}"
        )
    tol = DEFAULT.with_(eps_p=args.eps_p, scan_grid=args.grid)
    res = find_pf(spec, args.theta, tol, args.criterion)
    num = _json_num if args.format == "json" else float
    record = {
        "degrees": ";".join(map(str, spec.offspring)),
        "theta": args.theta,
        "p_low": num(res.p_low),
        "p_high": num(res.p_high),
        "p_est": num(res.p_est),
        "criterion": res.criterion.value,
        "evaluations": res.evaluations,
    }
    _emit(_table(record, args.format), args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    overrides = dict(
        a_range=args.a_range,
        b_rule=args.b_rule,
        b_values=args.b_values,
        theta_range=args.theta_range,
        specs=[s.offspring for s in args.degrees] if args.degrees else None,
        eps_p=args.eps_p,
        output_path=args.output,
        format=args.format,
        jobs=args.jobs,
    )
    try:
        if args.config:
            config = SweepConfig.from_json(args.config, **overrides)
        else:
            config = SweepConfig().override(**overrides)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"bad sweep config: {exc}") from None
    rows = run_sweep(config)
    for warning in monotonicity_warnings(rows):
        print(f"warning: {warning}", file=sys.stderr)
    text = rows_to_json(rows) if config.format == "json" else rows_to_csv(rows, pair=not config.general)
    _emit(text, config.output_path)
    return EXIT_OK


def cmd_simulate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    spec, theta = args.degrees, args.theta
    if theta < 2:
        raise UsageError("theta must be >= 2")
    est = mc_root_activation(
        spec, theta, args.p, args.depth, args.orientation, args.trials, seed, args.jobs
    )
    reference = root_probability(spec, theta, args.p, args.depth, relaxed=True)
    diff = est.mean - reference
    if est.stderr > 0:
        z = diff / est.stderr
    else:
        z = 0.0 if diff == 0 else math.copysign(math.inf, diff)
    num = _json_num if args.format == "json" else float
    record = {
        "degrees": ";".join(map(str, spec.offspring)),
        "theta": theta,
        "p": num(args.p),
        "depth": args.depth,
        "orientation": args.orientation.value,
        "mean": num(est.mean),
        "stderr": num(est.stderr),
        "trials": est.trials,
        "seed": est.seed,
        "rng": est.rng,
        "reference": num(reference),
        "z": num(z) if args.format == "json" else z,
    }
    _emit(_table(record, args.format), args.output)
    # the oriented recurrence is only an identity for the oriented tree
    if args.orientation is Orientation.ORIENTED and abs(z) > Z_LIMIT:
        print(f"warning: |z| = {abs(z):.3g} exceeds {Z_LIMIT}", file=sys.stderr)
        return EXIT_ZSCORE
    return EXIT_OK


def cmd_verify(args) -> int:
    tol = DEFAULT if args.eps_fp is None else DEFAULT.with_(eps_fp=args.eps_fp)
    outcomes = run_checks(tuple(args.only or ()), tol)
    if args.format == "json":
        text = json.dumps(
            [{"group": o.group, "name": o.name, "passed": o.passed, "detail": o.detail} for o in outcomes],
            indent=2,
        ) + "\n"
    else:
        text = "".join(
            f"{'PASS' if o.passed else 'FAIL'} {o.group}/{o.name}: {o.detail}\n" for o in outcomes
        )
    _emit(text, args.output)
    return EXIT_OK if all(o.passed for o in outcomes) else EXIT_VERIFY


def cmd_phi(args) -> int:
    params = PhiParams(args.n, args.theta, args.p)
    record = {"n": args.n, "theta": args.theta, "p": args.p, "x": args.x}
    record.update(phi=phi(params, args.x), big_phi=big_phi(params, args.x), phi_prime=phi_prime(params, args.x))
    if args.format == "json":
        record = {k: _json_num(v) if isinstance(v, float) else v for k, v in record.items()}
    _emit(_table(record, args.format), args.output)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perctree", description="Bootstrap percolation thresholds on periodic trees."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--output", metavar="PATH")

    p = sub.add_parser("threshold", help="critical probability p_f of one periodic tree")
    p.add_argument("--degrees", type=_spec, required=True, help="m0,m1,...")
    p.add_argument("--theta", type=int, required=True)
    p.add_argument("--eps-p", type=float, default=DEFAULT.eps_p)
    p.add_argument("--grid", type=int, default=DEFAULT.scan_grid)
    p.add_argument("--criterion", choices=[c.value for c in Criterion], default=Criterion.BOTH.value)
    common(p)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("sweep", help="p_f over an (a, b, theta) grid")
    p.add_argument("--config", metavar="PATH", help="JSON file with SweepConfig fields")
    p.add_argument("--a-range", type=_range)
    p.add_argument("--b-rule", choices=("equal", "plus1", "plus2", "double", "explicit"))
    p.add_argument("--b-values", type=lambda s: [int(v) for v in s.split(",")])
    p.add_argument("--theta-range", type=_range)
    p.add_argument("--degrees", type=_spec, action="append", help="general-l spec; repeatable")
    p.add_argument("--eps-p", type=float)
    p.add_argument("--jobs", type=int)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo root activation vs the recurrence")
    p.add_argument("--degrees", type=_spec, required=True)
    p.add_argument("--theta", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--depth", type=int, required=True)
    orient = p.add_mutually_exclusive_group()
    orient.add_argument("--oriented", dest="orientation", action="store_const", const=Orientation.ORIENTED)
    orient.add_argument("--unoriented", dest="orientation", action="store_const", const=Orientation.UNORIENTED)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=None, help="default: $PERCTREE_SEED or 0")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.set_defaults(orientation=Orientation.ORIENTED)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the built-in oracle checks")
    p.add_argument("--only", action="append", choices=GROUPS)
    p.add_argument("--eps-fp", type=float, default=None, help="debug: override the fixed-point tolerance")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("phi", help="evaluate phi, Phi and phi' at one point")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    common(p)
    p.set_defaults(func=cmd_phi)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "sweep" and args.format is None:
        args.format = "csv"
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CriterionDisagreement as exc:
        print(f"error: criterion disagreement: {exc}", file=sys.stderr)
        return EXIT_DISAGREE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
