"""Phi_p(x) = phi(x) - x for n = 7, theta = 5 at p = 0.3 and p = 0.4.

Prints the sampled curves as CSV (x, Phi at each p) followed by the
located roots and the tangency point between the two.

    python3 scripts/phi_curves.py --points 201 > phi_7_5.csv
"""

import argparse
import sys

import numpy as np

from perctree.core import PhiParams, big_phi
from perctree.threshold import count_roots, find_pc_regular


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=7)
    ap.add_argument("--theta", type=int, default=5)
    ap.add_argument("--p", type=float, nargs="+", default=[0.3, 0.4])
    ap.add_argument("--points", type=int, default=101)
    args = ap.parse_args()

    params = [PhiParams(args.n, args.theta, p) for p in args.p]
    print("x," + ",".join(f"Phi_{p:g}" for p in args.p))
    for x in np.linspace(0.0, 1.0, args.points):
        print(f"{x:.6f}," + ",".join(f"{big_phi(pr, x):.12g}" for pr in params))

    for pr in params:
        roots = count_roots(pr).roots
        where = ", ".join(f"{r.x:.10f}" for r in roots) or "none"
        print(f"p={pr.p:g}: {len(roots)} roots in (0,1): {where}", file=sys.stderr)
    tan = find_pc_regular(args.n, args.theta)
    print(f"p_c={tan.p_c:.12g} tangent at x={tan.x_tangent:.12g}", file=sys.stderr)


if __name__ == "__main__":
    main()
