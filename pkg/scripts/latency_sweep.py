#!/usr/bin/env python3
"""Query latency against expected sample size at a fixed item count; CSV on stdout.

Usage: python scripts/latency_sweep.py [--n 100000] [--trials 2000] [--seed 1]
"""

import argparse
import sys

from dpss.cli import main as cli_main


def run(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    return cli_main(
        ["bench", "--kind", "query", "--sizes", str(args.n), "--trials", str(args.trials),
         "--seed", str(args.seed)]
    )


if __name__ == "__main__":
    sys.exit(run())
