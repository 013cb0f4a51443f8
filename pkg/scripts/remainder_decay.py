"""Decay of the remainder M_p^(N) in p for several N, with a log-log slope fit.

    python scripts/remainder_decay.py [--potential cos|sin] [--k 2] [--p-max 12]
"""

import argparse

import numpy as np

from optrace import GalerkinModel, TrigOperatorPotential, TruncationSpec, remainder_estimate, sup_norm_estimate


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--potential", choices=("cos", "sin"), default="cos")
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--p-max", type=int, default=12)
    args = ap.parse_args()
    if args.potential == "cos":
        Q = TrigOperatorPotential.scalar(cos={2: 0.3})
    else:
        Q = TrigOperatorPotential.scalar(sin={1: 0.4})
    model = GalerkinModel(Q, TruncationSpec.for_potential(Q, args.p_max))
    clusters = model.clusters(sup_norm_estimate(Q))
    ps = list(range(1, args.p_max + 1))
    for N in range(1, 2 * args.k + 3):
        vals = np.array([remainder_estimate(model, clusters, p, args.k, N) for p in ps])
        mags = np.abs(vals)
        resolved = mags > 1e-14
        slope = np.polyfit(np.log(np.array(ps)[resolved]), np.log(mags[resolved]), 1)[0] \
            if resolved.sum() >= 2 else float("nan")
        print(f"N={N}: slope {slope:+.2f}  " + " ".join(f"{v:+.2e}" for v in vals))


if __name__ == "__main__":
    main()
