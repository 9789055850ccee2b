#!/usr/bin/env python3
"""L(n, u) over the full density range for a set of couplings, plus the
exact ring values it is compared against."""

import argparse
import csv
import sys

import numpy as np

from hubbard_ent.ed import solve
from hubbard_ent.functional import l_hom_scan
from hubbard_ent.lattice import LatticeSpec


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--u", type=float, nargs="+", default=[-8, -2, -0.5, 0, 0.5, 2, 8])
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--ring", type=int, default=8, help="ring size for the ED overlay (0 = none)")
    p.add_argument("--out", default="homogeneous.csv")
    args = p.parse_args(argv)

    densities = np.linspace(0.0, 2.0, args.points)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "n", "L", "kind"])
        for u in args.u:
            for n, value in l_hom_scan(u, densities):
                w.writerow([u, repr(n), repr(value), "functional"])
            if args.ring:
                for k in range(0, args.ring + 1):
                    spec = LatticeSpec.uniform(args.ring, k, k, "periodic")
                    res = solve(spec, u)
                    if res.ground.degenerate:
                        continue
                    w.writerow([u, repr(2 * k / args.ring),
                                repr(res.probabilities.average_entropy), f"ed_ring{args.ring}"])
    print(f"wrote {args.out}", file=sys.stderr)


if __name__ == "__main__":
    main()
