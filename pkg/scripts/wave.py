"""Run the circular wave of length n and print where the 1 sits at each step."""
import argparse

from puredmm.engine import build_network, run
from puredmm.experiments import build_wave, wave_positions


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--cycles", type=int, default=3)
    args = ap.parse_args()
    spec = build_wave(args.n)
    rows = run(build_network(spec), args.cycles * args.n, ["Y0[1]"]).values("Y0[1]")
    width = spec.shape[1]
    for t, j in enumerate(wave_positions(rows), start=1):
        print(f"t={t:4d}  " + "".join("#" if c == j else "." for c in range(width)))


if __name__ == "__main__":
    main()
