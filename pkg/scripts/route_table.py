"""The contour terms M_pj by three routes (big-circle forms and residue sum).

    python scripts/route_table.py [--k 2] [--p-max 3]
"""

import argparse

from optrace import GalerkinModel, TrigOperatorPotential, TruncationSpec, route_table

POTENTIALS = {
    "0.2cos2x": TrigOperatorPotential.scalar(cos={2: 0.2}),
    "mixed d=2": TrigOperatorPotential(
        2, {1: [[0.1, 0.05], [0.05, -0.1]]}, {2: [[0.04, -0.08], [-0.08, 0.02]]}
    ),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--p-max", type=int, default=3)
    args = ap.parse_args()
    jmax = 2 * args.k + 2
    for name, Q in POTENTIALS.items():
        model = GalerkinModel(Q, TruncationSpec.for_potential(Q, args.p_max))
        print(f"{name}, k={args.k}")
        print(f"  {'p':>2} {'j':>2} {'eq24':>23} {'eq26':>23} {'residue_sum':>23} {'spread':>9}")
        for r in route_table(model, range(1, args.p_max + 1), args.k, jmax):
            print(f"  {r['p']:2d} {r['j']:2d} {r['eq24']:+.16e} {r['eq26']:+.16e} "
                  f"{r['residue_sum']:+.16e} {r['spread']:.1e}")


if __name__ == "__main__":
    main()
