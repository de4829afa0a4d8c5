"""Definitional sampling oracle and the statistical harness behind every exactness claim.

The oracle flips one exact coin per item; the harness compares observed
frequencies against exact rational probabilities in z-score bands, tests
pairwise independence through inclusion covariances, and emits machine-readable
CSV.  Batched collection uses 64-bit inclusion masks so a million trials on a
64-item instance stay cheap.
"""

from __future__ import annotations

import math
from array import array
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .halt import HaltStructure
from .randomness import RandomSource
from .rationals import Rational
from .samplers import _ber_scaled


@dataclass
class FrequencyReport:
    outcome: str
    expected: Rational
    observed: int
    trials: int
    z: float
    passed: bool


@dataclass
class CovarianceReport:
    first: int
    second: int
    covariance: float
    z: float
    passed: bool


def _log_binom_pmf(n: int, k: int, p: float) -> float:
    return (
        math.lgamma(n + 1)
        - math.lgamma(k + 1)
        - math.lgamma(n - k + 1)
        + k * math.log(p)
        + (n - k) * math.log1p(-p)
    )


def _binom_cdf(n: int, c: int, p: float) -> float:
    if c < 0:
        return 0.0
    if c >= n:
        return 1.0
    return min(1.0, sum(math.exp(_log_binom_pmf(n, k, p)) for k in range(c + 1)))


def _z_from_pvalue(pv: float) -> float:
    """Equivalent two-sided normal quantile: erfc(z/sqrt(2)) = pv."""
    if pv >= 1.0:
        return 0.0
    if pv <= 0.0:
        return math.inf
    lo, hi = 0.0, 60.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if math.erfc(mid / math.sqrt(2)) > pv:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def frequency_report(
    outcome: str, expected: Rational, observed: int, trials: int, z_max: float
) -> FrequencyReport:
    """Band comparison of a count against its exact probability.

    Cells with comfortably large expected counts use the plain z statistic;
    sparse cells (where the normal approximation is invalid) use the exact
    two-sided binomial tail at the same significance level, reported as the
    equivalent normal quantile.
    """
    p = float(expected)
    mean = p * trials
    if expected.num == 0 or expected.num == expected.den:
        exact_count = trials if expected.num == expected.den else 0
        z = 0.0 if observed == exact_count else math.inf
        return FrequencyReport(outcome, expected, observed, trials, z, z == 0.0)
    if min(mean, trials - mean) >= 50.0:
        se = math.sqrt(p * (1.0 - p) / trials)
        z = (observed / trials - p) / se
        return FrequencyReport(outcome, expected, observed, trials, z, abs(z) <= z_max)
    flip = mean > trials - mean
    c = trials - observed if flip else observed
    q = 1.0 - p if flip else p
    if c > 60.0 * (q * trials + 1.0) + 300.0:
        return FrequencyReport(outcome, expected, observed, trials, math.inf, False)
    lower = _binom_cdf(trials, c, q)
    upper = 1.0 - _binom_cdf(trials, c - 1, q)
    pv = min(1.0, 2.0 * min(lower, upper))
    z = _z_from_pvalue(pv)
    signed = z if observed >= mean else -z
    return FrequencyReport(outcome, expected, observed, trials, signed, z <= z_max)


def oracle_pss(
    pairs: Sequence[tuple[int, int]], alpha: Rational, beta: Rational, src: RandomSource
) -> list[int]:
    """Ground-truth subset sample: one exact coin per item, straight from the definition."""
    weight_sum = sum(w for _, w in pairs)
    wn = alpha.num * weight_sum * beta.den + beta.num * alpha.den
    wd = alpha.den * beta.den
    if wn <= 0:
        raise ValueError("degenerate query: alpha*sum(w) + beta must be positive")
    out = []
    for item_id, w in pairs:
        num = w * wd
        if num >= wn or (num and _ber_scaled(num, wn, src)):
            out.append(item_id)
    return out


def exact_inclusion_probabilities(
    pairs: Sequence[tuple[int, int]], alpha: Rational, beta: Rational
) -> list[Rational]:
    weight_sum = sum(w for _, w in pairs)
    wn = alpha.num * weight_sum * beta.den + beta.num * alpha.den
    wd = alpha.den * beta.den
    if wn <= 0:
        raise ValueError("degenerate query")
    out = []
    for _, w in pairs:
        num = w * wd
        out.append(Rational(1) if num >= wn else Rational(num, wn))
    return out


def marginal_test(
    sample_fn: Callable[[], Iterable[int]],
    expected: Sequence[Rational],
    trials: int,
    z_max: float = 5.0,
) -> list[FrequencyReport]:
    """Per-position inclusion frequencies vs exact probabilities at z_max sigma."""
    counts = [0] * len(expected)
    for _ in range(trials):
        for idx in sample_fn():
            counts[idx] += 1
    return [
        frequency_report(f"item{idx}", expected[idx], counts[idx], trials, z_max)
        for idx in range(len(expected))
    ]


def independence_test(
    sample_fn: Callable[[], Iterable[int]],
    n_items: int,
    trials: int,
    z_max: float = 5.0,
) -> list[CovarianceReport]:
    """Empirical covariance of every inclusion-indicator pair vs zero."""
    counts = [0] * n_items
    pair_counts = [[0] * n_items for _ in range(n_items)]
    for _ in range(trials):
        chosen = list(sample_fn())
        for a in chosen:
            counts[a] += 1
        for ai in range(len(chosen)):
            a = chosen[ai]
            row = pair_counts[a]
            for bi in range(ai + 1, len(chosen)):
                row[chosen[bi]] += 1
    return covariance_reports_from_counts(
        np.array(counts, dtype=np.int64),
        np.array(pair_counts, dtype=np.int64),
        trials,
        z_max,
    )


def covariance_reports_from_counts(
    counts: np.ndarray,
    pair_counts: np.ndarray,
    trials: int,
    z_max: float,
    expected: Sequence[Rational] | None = None,
) -> list[CovarianceReport]:
    """Covariance-of-indicators tests: each pair's joint count against the
    independence null.

    With exact marginals the null joint probability is their exact product;
    otherwise the empirical product.  Dense cells use the plain z statistic of
    the empirical covariance; sparse cells fall back to the exact binomial tail
    on the joint count (same significance), since one chance co-occurrence of
    two rare items would otherwise look like a huge z.
    """
    n = len(counts)
    p = counts / trials
    reports = []
    for a in range(n):
        for b in range(a + 1, n):
            joint = int(pair_counts[a][b] + pair_counts[b][a])
            if expected is not None:
                null = expected[a] * expected[b]
            else:
                null = Rational(int(counts[a]) * int(counts[b]), trials * trials)
            if null.num == 0 or null.num == null.den:
                cov = joint / trials - float(null)
                reports.append(
                    CovarianceReport(a, b, cov, 0.0 if cov == 0.0 else math.inf, cov == 0.0)
                )
                continue
            mean = float(null) * trials
            if min(mean, trials - mean) >= 50.0:
                # empirical covariance: subtracting the *empirical* product is
                # what gives the statistic its pa(1-pa)pb(1-pb)/T variance
                cov = joint / trials - p[a] * p[b]
                var = p[a] * (1 - p[a]) * p[b] * (1 - p[b])
                z = cov / math.sqrt(var / trials) if var > 0 else math.inf
                reports.append(CovarianceReport(a, b, float(cov), z, abs(z) <= z_max))
            else:
                # sparse pairs: exact binomial tail on the joint count against
                # the exact null product (marginals are tested separately)
                cov = joint / trials - float(null)
                fr = frequency_report(f"joint({a},{b})", null, joint, trials, z_max)
                reports.append(CovarianceReport(a, b, float(cov), fr.z, fr.passed))
    return reports


def pmf_reports_from_counts(
    counts: Sequence[int],
    pmf: Sequence[Rational],
    trials: int,
    z_max: float = 5.0,
    min_expected: float = 10.0,
    prefix: str = "out",
) -> list[FrequencyReport]:
    """Reports for outcome counts over {1..n}; sparse outcomes pool into a tail."""
    reports = []
    tail_expected = Rational(0)
    tail_observed = 0
    pooled = 0
    for i in range(1, len(pmf) + 1):
        exp = pmf[i - 1]
        if float(exp) * trials < min_expected:
            tail_expected = tail_expected + exp
            tail_observed += counts[i - 1]
            pooled += 1
        else:
            reports.append(frequency_report(f"{prefix}{i}", exp, counts[i - 1], trials, z_max))
    if pooled:
        reports.append(
            frequency_report(f"{prefix}-tail", tail_expected.reduced(), tail_observed, trials, z_max)
        )
    return reports


def pmf_test(
    sampler_fn: Callable[[], int],
    pmf: Sequence[Rational],
    trials: int,
    z_max: float = 5.0,
    min_expected: float = 10.0,
) -> list[FrequencyReport]:
    """Outcome frequencies over {1..n} vs an exact pmf; sparse outcomes pool into a tail."""
    counts = [0] * len(pmf)
    for _ in range(trials):
        counts[sampler_fn() - 1] += 1
    return pmf_reports_from_counts(counts, pmf, trials, z_max, min_expected)


def reports_to_csv_lines(reports: Iterable[FrequencyReport]) -> list[str]:
    lines = ["outcome,expected,observed,trials,z,pass"]
    for r in reports:
        lines.append(
            f"{r.outcome},{r.expected.reduced()},{r.observed},{r.trials},{r.z:.4f},{int(r.passed)}"
        )
    return lines


def covariances_to_csv_lines(reports: Iterable[CovarianceReport]) -> list[str]:
    lines = ["pair,covariance,z,pass"]
    for r in reports:
        lines.append(f"({r.first};{r.second}),{r.covariance:.8f},{r.z:.4f},{int(r.passed)}")
    return lines


# ---------------------------------------------------------------------------
# Batched collection for end-to-end structure tests (up to 64 items)
# ---------------------------------------------------------------------------


def collect_inclusion_masks(
    query_fn: Callable[[], Iterable[int]],
    index_of: dict[int, int],
    trials: int,
) -> array:
    masks = array("Q", bytes(8 * trials))
    for t in range(trials):
        m = 0
        for item_id in query_fn():
            m |= 1 << index_of[item_id]
        masks[t] = m
    return masks


def masks_to_counts(masks: array, n_items: int) -> tuple[np.ndarray, np.ndarray]:
    """Marginal counts and pairwise co-occurrence counts from inclusion masks."""
    counts = np.zeros(n_items, dtype=np.float64)
    pair = np.zeros((n_items, n_items), dtype=np.float64)
    arr = np.frombuffer(masks.tobytes(), dtype=np.uint64)
    shifts = np.arange(n_items, dtype=np.uint64)
    chunk = 1 << 16
    for start in range(0, len(arr), chunk):
        block = arr[start : start + chunk, None]
        bits = ((block >> shifts) & np.uint64(1)).astype(np.float32)
        counts += bits.sum(axis=0)
        pair += bits.T @ bits
    # upper triangle only: the reporting convention sums [a][b] + [b][a]
    pair = np.triu(pair, k=1)
    return counts.astype(np.int64), pair.astype(np.int64)


def run_pss_trials(
    pairs: Sequence[tuple[int, int]],
    alpha: tuple[int, int],
    beta: tuple[int, int],
    trials: int,
    seed: int,
    use_table: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Build a structure and run repeated queries; returns (counts, pair counts).

    Top-level and picklable so trial blocks can shard across processes.
    """
    structure = HaltStructure(pairs, use_table=use_table)
    src = RandomSource(seed)
    a = Rational(*alpha)
    b = Rational(*beta)
    index_of = {item_id: i for i, (item_id, _) in enumerate(pairs)}
    masks = collect_inclusion_masks(lambda: structure.query(a, b, src), index_of, trials)
    counts, pair = masks_to_counts(masks, len(pairs))
    return counts, pair


# ---------------------------------------------------------------------------
# Named suites (shardable workers are top-level for multiprocessing)
# ---------------------------------------------------------------------------


def _sampler_counts(kind: str, params: tuple, trials: int, seed: int) -> list[int]:
    """Outcome counts for one sampler configuration; picklable shard worker."""
    from . import samplers as sp

    src = RandomSource(seed)
    if kind == "ber":
        p = Rational(*params)
        c = 0
        for _ in range(trials):
            c += sp.ber_rational(src, p)
        return [c]
    if kind == "ber_pstar":
        q, n = Rational(params[0], params[1]), params[2]
        c = 0
        for _ in range(trials):
            c += sp.ber_pstar(src, q, n)
        return [c]
    if kind == "ber_half_inv_pstar":
        q, n = Rational(params[0], params[1]), params[2]
        c = 0
        for _ in range(trials):
            c += sp.ber_half_inv_pstar(src, q, n)
        return [c]
    if kind == "bgeo":
        p, n = Rational(params[0], params[1]), params[2]
        counts = [0] * n
        for _ in range(trials):
            counts[sp.bgeo(src, p, n) - 1] += 1
        return counts
    if kind == "bgeo_table":
        p, n = Rational(params[0], params[1]), params[2]
        sampler = sp.BoundedGeoSampler(p, n)
        counts = [0] * n
        for _ in range(trials):
            counts[sampler.sample(src) - 1] += 1
        return counts
    if kind == "tgeo":
        p, n = Rational(params[0], params[1]), params[2]
        counts = [0] * n
        for _ in range(trials):
            counts[sp.tgeo(src, p, n) - 1] += 1
        return counts
    raise ValueError(f"unknown sampler kind {kind}")


def _sharded_counts(kind: str, params: tuple, trials: int, seed: int, threads: int) -> list[int]:
    if threads <= 1:
        return _sampler_counts(kind, params, trials, seed)
    import multiprocessing as mp

    base = RandomSource(seed)
    share = trials // threads
    jobs = []
    for t in range(threads):
        n_t = share + (trials - share * threads if t == threads - 1 else 0)
        jobs.append((kind, params, n_t, base.spawn(t).seed))
    with mp.Pool(threads) as pool:
        parts = pool.starmap(_sampler_counts, jobs)
    out = [0] * len(parts[0])
    for part in parts:
        for i, v in enumerate(part):
            out[i] += v
    return out


SAMPLER_BATTERY = [
    ("ber(0)", "ber", (0, 1)),
    ("ber(1)", "ber", (1, 1)),
    ("ber(3/7)", "ber", (3, 7)),
    ("ber(1/3)", "ber", (1, 3)),
    ("ber(255/256)", "ber", (255, 256)),
    ("ber_pstar(1/2,2)", "ber_pstar", (1, 2, 2)),
    ("ber_pstar(1/32,32)", "ber_pstar", (1, 32, 32)),
    ("ber_pstar(1/5,3)", "ber_pstar", (1, 5, 3)),
    ("ber_pstar(q,n=1)", "ber_pstar", (2, 5, 1)),
    ("ber_hip(1/2,2)", "ber_half_inv_pstar", (1, 2, 2)),
    ("ber_hip(1/32,32)", "ber_half_inv_pstar", (1, 32, 32)),
    ("ber_hip(q,n=1)", "ber_half_inv_pstar", (2, 5, 1)),
    ("bgeo(1/2,3)", "bgeo", (1, 2, 3)),
    ("bgeo(1/3,5)", "bgeo", (1, 3, 5)),
    ("bgeo(1/10000,101)", "bgeo", (1, 10000, 101)),
    ("bgeo_table(1/2,3)", "bgeo_table", (1, 2, 3)),
    ("bgeo_table(1/3,5)", "bgeo_table", (1, 3, 5)),
    ("bgeo_table(1/10000,101)", "bgeo_table", (1, 10000, 101)),
    ("tgeo(p,n=1)", "tgeo", (1, 2, 1)),
    ("tgeo(1/2,2)", "tgeo", (1, 2, 2)),
    ("tgeo(1/4,8)", "tgeo", (1, 4, 8)),
    ("tgeo(1/100,10)", "tgeo", (1, 100, 10)),
]


def sampler_expected(kind: str, params: tuple):
    from . import samplers as sp

    if kind == "ber":
        return [Rational(*params)]
    if kind == "ber_pstar":
        return [sp.pstar_exact(Rational(params[0], params[1]), params[2])]
    if kind == "ber_half_inv_pstar":
        return [sp.half_inv_pstar_exact(Rational(params[0], params[1]), params[2])]
    if kind in ("bgeo", "bgeo_table"):
        return sp.bgeo_pmf(Rational(params[0], params[1]), params[2])
    if kind == "tgeo":
        return sp.tgeo_pmf(Rational(params[0], params[1]), params[2])
    raise ValueError(kind)


def sampler_suite(
    seed: int, trials: int, z_max: float = 5.0, threads: int = 1
) -> list[FrequencyReport]:
    """The full sampler battery: every configuration against its exact law."""
    reports = []
    base = RandomSource(seed)
    for idx, (name, kind, params) in enumerate(SAMPLER_BATTERY):
        counts = _sharded_counts(kind, params, trials, base.spawn(idx).seed, threads)
        expected = sampler_expected(kind, params)
        if len(expected) == 1:
            reports.append(frequency_report(name, expected[0], counts[0], trials, z_max))
        else:
            reports.extend(
                pmf_reports_from_counts(counts, expected, trials, z_max, prefix=f"{name}:")
            )
    return reports


def pss_fixture(n_items: int = 64, seed: int = 7) -> list[tuple[int, int]]:
    """Deterministic mixed-weight instance for end-to-end verification."""
    src = RandomSource(seed)
    pairs = []
    for i in range(n_items):
        kind = i % 4
        if kind == 0:
            w = 1 + src.below(8)
        elif kind == 1:
            w = 1 << src.below(20)
        elif kind == 2:
            w = 1 + src.below(1 << 16)
        else:
            w = (1 << 40) + src.below(1 << 40)
        pairs.append((i, w))
    return pairs


def pss_settings(pairs: list[tuple[int, int]]) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """(alpha, beta) settings spanning all-certain, all-insignificant, and mixed regimes."""
    total = sum(w for _, w in pairs)
    wmin = min(w for _, w in pairs)
    wmax = max(w for _, w in pairs)
    n = len(pairs)
    return [
        ((1, 1), (0, 1)),  # proportional
        ((0, 1), (max(1, wmin), 1)),  # all certain
        ((0, 1), (4 * n * n * n * wmax, 1)),  # all insignificant
        ((1, 3), (7, 2)),  # mixed rational
        ((0, 1), (max(1, total // 7), 1)),  # mid-range
        ((2, 1), (total, 1)),  # heavy alpha
    ]


def _pss_worker(
    pairs: list[tuple[int, int]],
    alpha: tuple[int, int],
    beta: tuple[int, int],
    trials: int,
    seed: int,
    use_table: bool,
):
    return run_pss_trials(pairs, alpha, beta, trials, seed, use_table)


def pss_suite(
    seed: int,
    trials: int,
    z_max: float = 5.0,
    threads: int = 1,
    pairs: list[tuple[int, int]] | None = None,
    use_table: bool = True,
) -> tuple[list[FrequencyReport], list[CovarianceReport]]:
    """End-to-end structure verification on a fixture: marginals + covariances."""
    if pairs is None:
        pairs = pss_fixture()
    freq: list[FrequencyReport] = []
    cov: list[CovarianceReport] = []
    base = RandomSource(seed)
    for s_idx, (alpha, beta) in enumerate(pss_settings(pairs)):
        a, b = Rational(*alpha), Rational(*beta)
        expected = exact_inclusion_probabilities(pairs, a, b)
        if threads <= 1:
            counts, pair_m = run_pss_trials(pairs, alpha, beta, trials, base.spawn(s_idx).seed, use_table)
        else:
            import multiprocessing as mp

            share = trials // threads
            jobs = []
            for t in range(threads):
                n_t = share + (trials - share * threads if t == threads - 1 else 0)
                jobs.append((pairs, alpha, beta, n_t, base.spawn(s_idx * 1000 + t).seed, use_table))
            with mp.Pool(threads) as pool:
                parts = pool.starmap(_pss_worker, jobs)
            counts = sum(p[0] for p in parts)
            pair_m = sum(p[1] for p in parts)
        tag = f"a={alpha[0]}/{alpha[1]},b={beta[0]}/{beta[1]}"
        for i, e in enumerate(expected):
            freq.append(frequency_report(f"{tag}:item{i}", e, int(counts[i]), trials, z_max))
        cov.extend(covariance_reports_from_counts(counts, pair_m, trials, z_max, expected))
    return freq, cov


def table_suite() -> list[FrequencyReport]:
    """Exact multiplicity audit of small lookup tables: every row of every
    configuration must hold each result exactly Pr(r) * (m^2)^K times."""
    from .halt import LookupTable

    reports = []
    for K, m in [(1, 2), (2, 2), (2, 3), (1, 5), (3, 2)]:
        table = LookupTable(K, m)
        m2 = m * m
        cells = m2**K
        ok = True
        for cfg_index in range((m + 1) ** K):
            cfg = []
            c = cfg_index
            for _ in range(K):
                cfg.append(c % (m + 1))
                c //= m + 1
            row = table.rows[cfg_index]
            seen = [0] * (1 << K)
            for cell in row:
                seen[cell] += 1
            for r in range(1 << K):
                mult = 1
                for t in range(K):
                    u = min(m2, cfg[t] << (t + 2))
                    mult *= u if (r >> t) & 1 else m2 - u
                if seen[r] != mult:
                    ok = False
        reports.append(
            FrequencyReport(f"table_K{K}_m{m}", Rational(1), int(ok), 1, 0.0 if ok else math.inf, ok)
        )
    return reports


def sorted_set_suite(seed: int, ops: int = 100000) -> list[FrequencyReport]:
    """Randomized stress of the bounded ordered set against a plain sorted oracle."""
    from .intset import BoundedIntSet

    src = RandomSource(seed)
    s = BoundedIntSet(128)
    ref: set[int] = set()
    order_ok = True
    neighbors_ok = True
    for step in range(ops):
        v = src.below(128)
        if v in ref:
            s.delete(v)
            ref.discard(v)
        else:
            s.insert(v)
            ref.add(v)
        if step % 1024 == 0:
            s.check()
            if list(s) != sorted(ref):
                order_ok = False
            q = src.below(128)
            suc = min((x for x in ref if x >= q), default=None)
            pre = max((x for x in ref if x <= q), default=None)
            if s.successor(q) != suc or s.predecessor(q) != pre:
                neighbors_ok = False
    s.check()
    exhaustive_ok = True
    for q in range(128):
        suc = min((x for x in ref if x >= q), default=None)
        pre = max((x for x in ref if x <= q), default=None)
        if s.successor(q) != suc or s.predecessor(q) != pre:
            exhaustive_ok = False
    return [
        FrequencyReport("sorted_set_order", Rational(1), int(order_ok), 1, 0.0, order_ok),
        FrequencyReport(
            "sorted_set_neighbors", Rational(1), int(neighbors_ok), 1, 0.0, neighbors_ok
        ),
        FrequencyReport(
            "sorted_set_exhaustive", Rational(1), int(exhaustive_ok), 1, 0.0, exhaustive_ok
        ),
    ]
