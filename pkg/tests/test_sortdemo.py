import math
import random

import pytest

from dpss.randomness import RandomSource
from dpss.rationals import Rational
from dpss.sortdemo import ReferenceFloatDpss, SortStats, sort_via_dpss


def test_sort_tiny():
    src = RandomSource(1)
    out, stats = sort_via_dpss([5, 1, 3], src)
    assert out == [5, 3, 1]
    assert stats.rounds == 3


def test_sort_rejects_duplicates():
    with pytest.raises(ValueError):
        sort_via_dpss([2, 2, 3], RandomSource(1))


def test_structure_rejects_bad_input():
    with pytest.raises(ValueError):
        ReferenceFloatDpss([])
    with pytest.raises(ValueError):
        ReferenceFloatDpss([(0, 3), (1, 3)])
    with pytest.raises(ValueError):
        ReferenceFloatDpss([(0, -1)])
    d = ReferenceFloatDpss([(0, 3)])
    with pytest.raises(ValueError):
        d.delete(9)


def test_single_item_always_sampled():
    d = ReferenceFloatDpss([(0, 7)])
    src = RandomSource(2)
    for _ in range(100):
        assert d.query(src) == [0]


def test_two_item_exact_joint():
    # exponents {3, 2}: W = 12, probabilities 2/3 and 1/3
    d = ReferenceFloatDpss([(0, 3), (1, 2)])
    src = RandomSource(3)
    trials = 120_000
    counts = [0] * 4
    for _ in range(trials):
        got = set(d.query(src))
        counts[(1 in got) * 2 + (0 in got)] += 1
    expect = [(1 / 3) * (2 / 3), (2 / 3) * (2 / 3), (1 / 3) * (1 / 3), (2 / 3) * (1 / 3)]
    for c, p in zip(counts, expect):
        se = math.sqrt(p * (1 - p) / trials)
        assert abs(c / trials - p) <= 5 * se


def test_marginals_small_instance():
    # wide and tight exponents together, deep enough to engage the tail skip
    exps = [40, 39, 38, 37, 36, 35, 30, 29, 28, 20, 12, 11, 10, 3, 2, 0]
    d = ReferenceFloatDpss(list(enumerate(exps)))
    probs = dict(d.inclusion_probabilities())
    src = RandomSource(4)
    trials = 150_000
    counts = dict.fromkeys(range(len(exps)), 0)
    for _ in range(trials):
        for i in d.query(src):
            counts[i] += 1
    for i in range(len(exps)):
        p = float(probs[i])
        mean = p * trials
        if min(mean, trials - mean) < 50:
            continue
        se = math.sqrt(p * (1 - p) / trials)
        assert abs(counts[i] / trials - p) <= 5 * se, (i, exps[i])


def test_largest_sampled_at_least_half_the_time():
    rng = random.Random(5)
    exps = rng.sample(range(200), 32)
    d = ReferenceFloatDpss(list(enumerate(exps)))
    top_id = max(range(32), key=lambda i: exps[i])
    src = RandomSource(6)
    trials = 60_000
    hits = sum(top_id in d.query(src) for _ in range(trials))
    assert hits / trials >= 0.5 - 5 * math.sqrt(0.25 / trials)


def test_deleted_items_never_return():
    d = ReferenceFloatDpss([(0, 9), (1, 5), (2, 2)])
    d.delete(0)
    src = RandomSource(7)
    for _ in range(300):
        assert 0 not in d.query(src)
    d.delete(1)
    d.delete(2)
    assert len(d) == 0


def test_sort_medium_with_counters():
    rng = random.Random(8)
    values = rng.sample(range(1 << 32), 1500)
    src = RandomSource(9)
    out, stats = sort_via_dpss(values, src)
    assert out == sorted(values, reverse=True)
    assert stats.rounds == 1500
    # per-round query count: mean <= 2 within 5 sigma of the bound
    mean_q = stats.mean_queries_per_round
    sd = (
        sum((q - mean_q) ** 2 for q in stats.per_round_queries) / max(1, stats.rounds - 1)
    ) ** 0.5
    assert mean_q <= 2 + 5 * sd / math.sqrt(stats.rounds), mean_q
    # expected sample size is exactly 1 per query
    assert abs(stats.mean_sample_size - 1) <= 5 * 1.0 / math.sqrt(stats.queries)
    assert stats.swaps <= 10 * 1500


def test_sort_dense_exponents():
    # adjacent exponents force real retries and tail activity
    values = list(range(400))
    src = RandomSource(10)
    out, stats = sort_via_dpss(values, src)
    assert out == sorted(values, reverse=True)
    assert 1.0 <= stats.mean_queries_per_round <= 2.5


def test_stats_defaults():
    s = SortStats()
    assert s.mean_queries_per_round == 0.0
    assert s.mean_sample_size == 0.0
