"""Command-line front end: build from files, query, verify, bench, sorting demo.

Deterministic results go to stdout (byte-identical for a fixed seed); wall-clock
measurements go to stderr except in `bench`, whose whole point is timing.
"""

from __future__ import annotations

import argparse
import gc
import hashlib
import os
import statistics
import sys
import time
from dataclasses import dataclass

from .halt import HaltStructure
from .randomness import RandomSource
from .rationals import Rational
from .sortdemo import sort_via_dpss
from . import verification as verif


def parse_rational(text: str) -> Rational:
    """Parse 'p/q' or a plain integer; decimal floats are rejected (exactness)."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Rational(int(num), int(den))
    return Rational(int(text))


def load_items(path: str) -> list[tuple[int, int]]:
    """Item file: one `<id><TAB><weight>` record per line, decimal, weight < 2^63."""
    pairs = []
    seen = set()
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected <id><TAB><weight>")
            item_id, weight = int(parts[0]), int(parts[1])
            if item_id < 0 or not 0 <= weight < (1 << 63):
                raise ValueError(f"{path}:{lineno}: id/weight out of range")
            if item_id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate id {item_id}")
            seen.add(item_id)
            pairs.append((item_id, weight))
    return pairs


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int.from_bytes(os.urandom(8), "little")


@dataclass
class BenchRecord:
    operation: str
    n: int
    params: str
    trials: int
    mean_ns: int
    median_ns: int
    max_ns: int
    mu: str

    @staticmethod
    def header() -> str:
        return "operation,n,params,trials,mean_ns,median_ns,max_ns,mu"

    def row(self) -> str:
        return (
            f"{self.operation},{self.n},{self.params},{self.trials},"
            f"{self.mean_ns},{self.median_ns},{self.max_ns},{self.mu}"
        )


def _synth_pairs(n: int, src: RandomSource) -> list[tuple[int, int]]:
    return [(i, 1 + src.below(1 << 30)) for i in range(n)]


def cmd_query(args) -> int:
    seed = _resolve_seed(args)
    try:
        pairs = load_items(args.file)
        alpha = parse_rational(args.alpha)
        beta = parse_rational(args.beta)
        structure = HaltStructure(pairs, use_table=not args.no_table)
        src = RandomSource(seed)
        chosen = structure.query(alpha, beta, src)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"# seed={seed}")
    for item_id in chosen:
        print(item_id)
    mu = structure.expected_sample_size(alpha, beta).reduced()
    print(f"mu={mu.num}/{mu.den}")
    return 0


def cmd_verify(args) -> int:
    seed = _resolve_seed(args)
    print(f"# seed={seed}")
    if args.suite == "samplers":
        reports = verif.sampler_suite(seed, args.trials, threads=args.threads)
        cov = []
    elif args.suite == "pss":
        reports, cov = verif.pss_suite(seed, args.trials, threads=args.threads)
    elif args.suite == "table":
        reports, cov = verif.table_suite(), []
    elif args.suite == "sorted-set":
        reports, cov = verif.sorted_set_suite(seed), []
    else:
        print(f"error: unknown suite {args.suite}", file=sys.stderr)
        return 2
    for line in verif.reports_to_csv_lines(reports):
        print(line)
    if cov:
        for line in verif.covariances_to_csv_lines(cov):
            print(line)
    ok = all(r.passed for r in reports) and all(r.passed for r in cov)
    print(f"# result={'pass' if ok else 'FAIL'}")
    return 0 if ok else 1


def _time_ns(fn) -> int:
    t0 = time.perf_counter_ns()
    fn()
    return time.perf_counter_ns() - t0


def cmd_bench(args) -> int:
    seed = _resolve_seed(args)
    sizes = [int(s) for s in args.sizes.split(",")]
    src = RandomSource(seed)
    print(f"# seed={seed}")
    print(BenchRecord.header())
    if args.kind == "build":
        for n in sizes:
            pairs = _synth_pairs(n, src)
            gc.collect()
            dt = _time_ns(lambda: HaltStructure(pairs))
            print(BenchRecord("build", n, "", 1, dt, dt, dt, "").row())
    elif args.kind == "update":
        for n in sizes:
            pairs = _synth_pairs(n, src)
            structure = HaltStructure(pairs)
            lat = []
            next_id = n
            gc.collect()
            gc.disable()
            try:
                for t in range(args.trials):
                    victim = src.below(n)
                    w = 1 + src.below(1 << 30)
                    t0 = time.perf_counter_ns()
                    structure.delete(victim)
                    structure.insert(next_id, w)
                    t1 = time.perf_counter_ns()
                    lat.append((t1 - t0) // 2)
                    # keep the id space dense so deletes stay uniform
                    structure.delete(next_id)
                    structure.insert(victim, 1 + src.below(1 << 30))
                    next_id += 1
            finally:
                gc.enable()
            print(
                BenchRecord(
                    "update",
                    n,
                    "",
                    args.trials,
                    int(statistics.fmean(lat)),
                    int(statistics.median(lat)),
                    max(lat),
                    "",
                ).row()
            )
    elif args.kind == "query":
        n = sizes[0]
        pairs = _synth_pairs(n, src)
        structure = HaltStructure(pairs)
        total = structure.total_weight
        alpha = Rational(0)
        for mu_target in [0, 1, 4, 16, 64, 256, 1024]:
            if mu_target == 0:
                beta = Rational(total * 4 * n * n)
            else:
                beta = Rational(max(1, total // mu_target))
            mu = structure.expected_sample_size(alpha, beta)
            lat = []
            for _ in range(min(50, args.trials)):  # warm caches off the clock
                structure.query(alpha, beta, src)
            gc.collect()
            gc.disable()
            try:
                for _ in range(args.trials):
                    t0 = time.perf_counter_ns()
                    structure.query(alpha, beta, src)
                    lat.append(time.perf_counter_ns() - t0)
            finally:
                gc.enable()
            print(
                BenchRecord(
                    "query",
                    n,
                    f"alpha=0;beta={beta.num}",
                    args.trials,
                    int(statistics.fmean(lat)),
                    int(statistics.median(lat)),
                    max(lat),
                    f"{float(mu):.4f}",
                ).row()
            )
    else:
        print(f"error: unknown bench kind {args.kind}", file=sys.stderr)
        return 2
    return 0


def cmd_sort_demo(args) -> int:
    seed = _resolve_seed(args)
    if args.n < 1:
        print("error: need n >= 1", file=sys.stderr)
        return 2
    if args.n > args.max_exponent:
        print("error: need n distinct exponents below --max-exponent", file=sys.stderr)
        return 2
    src = RandomSource(seed)
    values = set()
    while len(values) < args.n:
        values.add(src.below(args.max_exponent))
    values = list(values)
    t0 = time.perf_counter()
    out, stats = sort_via_dpss(values, src)
    wall = time.perf_counter() - t0
    correct = out == sorted(values, reverse=True)
    digest = hashlib.sha256(",".join(map(str, out)).encode()).hexdigest()
    print(f"# seed={seed}")
    print(f"n,{args.n}")
    print(f"correct,{int(correct)}")
    print(f"mean_queries_per_round,{stats.mean_queries_per_round:.6f}")
    print(f"mean_sample_size,{stats.mean_sample_size:.6f}")
    print(f"swaps_per_item,{stats.swaps / args.n:.6f}")
    print(f"digest,{digest}")
    print(f"wall_seconds,{wall:.3f}", file=sys.stderr)
    return 0 if correct else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dpss",
        description="Dynamic parameterized subset sampling: query, verify, bench, sort demo.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("query", help="build a structure from a file and run one query")
    q.add_argument("--file", required=True)
    q.add_argument("--alpha", required=True, help="rational literal p/q or integer")
    q.add_argument("--beta", required=True, help="rational literal p/q or integer")
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--no-table", action="store_true", help="use the direct exact final level")
    q.set_defaults(fn=cmd_query)

    v = sub.add_parser("verify", help="run a statistical/exactness suite, print CSV")
    v.add_argument("--suite", required=True, choices=["samplers", "pss", "table", "sorted-set"])
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--trials", type=int, default=1_000_000)
    v.add_argument("--threads", type=int, default=1)
    v.set_defaults(fn=cmd_verify)

    b = sub.add_parser("bench", help="measure build/update/query latencies, print CSV")
    b.add_argument("--kind", required=True, choices=["build", "update", "query"])
    b.add_argument("--sizes", default="10000,100000", help="comma-separated item counts")
    b.add_argument("--trials", type=int, default=10000)
    b.add_argument("--seed", type=int, default=None)
    b.set_defaults(fn=cmd_bench)

    s = sub.add_parser("sort-demo", help="sort random integers through the sampler reduction")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--max-exponent", type=int, default=1 << 20)
    s.add_argument("--seed", type=int, default=None)
    s.set_defaults(fn=cmd_sort_demo)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
