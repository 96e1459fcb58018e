"""Run the two-neuron oscillation and print the watched cell per step."""
import argparse

from puredmm.engine import build_network, run
from puredmm.experiments import build_oscillation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=10)
    args = ap.parse_args()
    trace = run(build_network(build_oscillation()), args.steps, ["Y0[1][1]", "Y0[0]"])
    for t, (v, row0) in enumerate(zip(trace.values("Y0[1][1]"), trace.values("Y0[0]")), start=1):
        print(f"t={t:4d}  Y0[1][1]={v:+.0f}  Y0[0]={row0}")


if __name__ == "__main__":
    main()
