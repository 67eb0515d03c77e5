"""Default convergence studies for every kernel, written to ``results/``.

    python scripts/run_convergence.py [--m 0,1,2] [--out results]
"""
import argparse
import sys

from rbfscreen.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", default="0,1,2")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    status = 0
    for m in args.m.split(","):
        argv = ["converge", "--m", m, "--out", args.out]
        if m == "0":
            argv.append("--no-stab")  # the H1 seminorm of C^0 kernels is unreliable
        status |= cli_main(argv)
    status |= cli_main(["interp-study", "--out", args.out])
    return status


if __name__ == "__main__":
    sys.exit(main())
