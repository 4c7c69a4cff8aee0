"""Fractional-Poisson convergence table; prints the CSV after writing it."""

import argparse
import os
import sys

from levymem.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=os.path.join(HERE, os.pardir, "configs", "fracpoisson.yaml"))
    ap.add_argument("--out", default=os.path.join("out", "fracpoisson"))
    args = ap.parse_args()
    code = main(["study-fracpoisson", "--config", args.config, "--out", args.out])
    if code == 0:
        with open(os.path.join(args.out, "fracpoisson.csv")) as fh:
            sys.stdout.write(fh.read())
    sys.exit(code)
