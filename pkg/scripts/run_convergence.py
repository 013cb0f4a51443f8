"""Convergence study of the trace formula in p for a few scalar potentials.

    python scripts/run_convergence.py [--k 2] [--p-max 16] [--out convergence.csv]
"""

import argparse
import csv

from optrace import TrigOperatorPotential, verify_convergence

POTENTIALS = {
    "0.3cos2x": TrigOperatorPotential.scalar(cos={2: 0.3}),
    "0.4sinx": TrigOperatorPotential.scalar(sin={1: 0.4}),
    "0.2cosx+0.1sin3x": TrigOperatorPotential.scalar(cos={1: 0.2}, sin={3: 0.1}),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--p-max", type=int, default=16)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    rows = []
    for name, Q in POTENTIALS.items():
        rep = verify_convergence(Q, args.k, range(1, args.p_max + 1))
        print(f"{name}: RHS = {rep.rows[0].rhs:.12g}  ({'; '.join(rep.warnings) or 'conditions ok'})")
        for r in rep.rows:
            print(f"  p={r.p:3d}  LHS={r.lhs_partial:+.15f}  dev={r.deviation:.3e}  M_p={r.remainder_N:+.3e}")
            rows.append([name, r.p, r.lhs_partial, r.rhs, r.deviation, r.remainder_N])
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["potential", "p", "lhs_partial", "rhs", "deviation", "remainder_N"])
            w.writerows(rows)


if __name__ == "__main__":
    main()
