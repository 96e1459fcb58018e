"""Compare the pipelined GRU network with a scalar reference GRU."""
import argparse

import numpy as np

from puredmm.experiments import GruParams, gru_reference, run_gru


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--draws", type=int, default=20)
    ap.add_argument("--steps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for k in range(args.draws):
        p = GruParams.random(rng)
        xs = list(rng.normal(size=args.steps))
        err = float(np.max(np.abs(np.subtract(run_gru(p, xs), gru_reference(p, xs)))))
        worst = max(worst, err)
        print(f"draw {k:3d}  max |h_net - h_ref| = {err:.3e}")
    print(f"worst over {args.draws} draws: {worst:.3e}")


if __name__ == "__main__":
    main()
