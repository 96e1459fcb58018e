"""Embed random DFAs as networks and compare against direct simulation."""
import argparse

import numpy as np

from puredmm.experiments import DfaSpec, build_dfa, dfa_simulate, run_dfa


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--length", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    agree = 0
    for k in range(args.count):
        d = DfaSpec.random(rng)
        word = list(rng.choice(list(d.alphabet), size=args.length))
        ok = run_dfa(build_dfa(d), word) == dfa_simulate(d, word)
        agree += ok
        if not ok:
            print(f"mismatch on DFA {k}: {d}")
    print(f"{agree}/{args.count} DFAs agree over inputs of length {args.length}")


if __name__ == "__main__":
    main()
