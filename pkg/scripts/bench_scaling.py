#!/usr/bin/env python3
"""Build and update scaling measurements across sizes; CSV on stdout.

Usage: python scripts/bench_scaling.py [--sizes 10000,100000,1000000] [--seed 1]
"""

import argparse
import sys

from dpss.cli import main as cli_main


def run(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="10000,100000,1000000")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    rc = cli_main(["bench", "--kind", "build", "--sizes", args.sizes, "--seed", str(args.seed)])
    rc |= cli_main(
        ["bench", "--kind", "update", "--sizes", args.sizes, "--trials", "5000",
         "--seed", str(args.seed)]
    )
    return rc


if __name__ == "__main__":
    sys.exit(run())
