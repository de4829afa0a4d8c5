import math
import random

import pytest

from dpss.bucketing import (
    BGStructure,
    DegenerateQueryError,
    DirectSampler,
    Item,
    QueryParams,
    extract_items,
    pad_pow2,
    query,
)
from dpss.randomness import RandomSource
from dpss.rationals import Rational

TRIALS = 100_000


def wire_direct(s: BGStructure) -> None:
    """Attach definitional next-level samplers to every group (test harness)."""
    for j, g in s.groups.items():
        ys = [
            Item(i, s.next_item_weight(i))
            for i in s.nonempty_buckets.iter_range(j * s.L, (j + 1) * s.L - 1)
        ]
        g.next_level = DirectSampler(ys)


def scan_invariants(s: BGStructure) -> None:
    total = 0
    count = 0
    for i, lst in s.buckets.items():
        assert lst
        assert i in s.nonempty_buckets
        for pos, x in enumerate(lst):
            assert (1 << i) <= x.weight < (1 << (i + 1))
            assert s.locator[x.id] == (i, pos)
            total += x.weight
            count += 1
    assert set(s.buckets) == set(s.nonempty_buckets)
    assert total == s.total_weight and count == s.count
    s.nonempty_buckets.check()
    s.nonempty_groups.check()
    for j in s.nonempty_groups:
        assert s.groups[j].bucket_count >= 1
    for i in s.nonempty_buckets:
        assert s.next_item_weight(i) == (len(s.buckets[i]) << (i + 1))


def freq_ok(observed, trials, p, z_max=5.0):
    if p in (0.0, 1.0):
        return observed == (trials if p == 1.0 else 0)
    se = math.sqrt(p * (1 - p) / trials)
    return abs(observed / trials - p) <= z_max * se


def test_pad_pow2():
    assert pad_pow2(0) == 2
    assert pad_pow2(1) == 2
    assert pad_pow2(2) == 2
    assert pad_pow2(3) == 4
    assert pad_pow2(17) == 32


def test_build_bucketing_example():
    s = BGStructure.build([Item(i, w) for i, w in enumerate([1, 5, 5, 9])], level=1)
    assert sorted(s.buckets) == [0, 2, 3]
    assert [x.weight for x in s.buckets[2]] == [5, 5]
    assert s.total_weight == 20
    scan_invariants(s)


def test_build_rejects_zero_weight_and_duplicates():
    with pytest.raises(ValueError):
        BGStructure.build([Item(0, 0)], level=1)
    with pytest.raises(ValueError):
        BGStructure.build([Item(0, 1), Item(0, 2)], level=1)


def test_build_random_invariant_scan():
    rng = random.Random(5)
    items = [Item(i, 1 + rng.randrange(1 << 40)) for i in range(10_000)]
    s = BGStructure.build(items, level=1)
    scan_invariants(s)


def test_insert_delete_roundtrip():
    rng = random.Random(6)
    items = [Item(i, 1 + rng.randrange(1 << 20)) for i in range(200)]
    s = BGStructure.build(items, level=1)
    for step in range(2000):
        victim = rng.randrange(200)
        if victim in s.locator:
            s.delete(victim)
        else:
            s.insert(Item(victim, 1 + rng.randrange(1 << 20)))
        if step % 200 == 0:
            scan_invariants(s)
    scan_invariants(s)


def test_classify_matches_hand_evaluation():
    # 16 items, so N = 16 and L = 4
    s = BGStructure.build([Item(i, 1) for i in range(16)], level=1, capacity=16)
    assert (s.N, s.L) == (16, 4)
    assert s.classify(Rational(1 << 20)) == (2, 5)


def test_classify_covers_every_bucket_correctly():
    # every possible bucket index lands in exactly one regime, with valid bounds
    s = BGStructure.build([Item(i, 1) for i in range(16)], level=1, capacity=16)
    rng = random.Random(7)
    for _ in range(500):
        w_num = rng.randint(1, 1 << 70)
        w_den = rng.randint(1, 1 << 10)
        total = Rational(w_num, w_den)
        j1, j2 = s.classify(total)
        assert j2 - j1 - 1 <= 3
        for i in range(0, 80):
            j = i // s.L
            if j <= j1:
                # insignificant: max inclusion probability <= 1/N^2
                assert Rational(1 << (i + 1)) * Rational(s.N * s.N) <= total * Rational(
                    1
                ) or Rational((1 << (i + 1)) * s.N * s.N, 1) <= total
            if j >= j2:
                assert Rational(1 << i, 1) >= total


def test_degenerate_total_rejected():
    s = BGStructure.build([Item(0, 4)], level=1)
    with pytest.raises(DegenerateQueryError):
        s.classify(Rational(0))


def test_query_params_validation():
    with pytest.raises(ValueError):
        QueryParams(Rational(-1, 2), Rational(0))
    qp = QueryParams(Rational(1, 2), Rational(3))
    assert qp.total_weight(10) == Rational(8)


def test_query_single_item_certain():
    s = BGStructure.build([Item(0, 4)], level=1)
    wire_direct(s)
    src = RandomSource(1)
    for _ in range(200):
        assert [x.id for x in query(s, Rational(4), src)] == [0]


def test_query_two_equal_items_joint():
    s = BGStructure.build([Item(0, 4), Item(1, 4)], level=1)
    wire_direct(s)
    src = RandomSource(2)
    counts = [0, 0, 0, 0]
    for _ in range(TRIALS):
        got = {x.id for x in query(s, Rational(8), src)}
        counts[(1 in got) * 2 + (0 in got)] += 1
    for c in counts:
        assert freq_ok(c, TRIALS, 0.25), counts


def test_query_random_instance_marginals():
    rng = random.Random(8)
    weights = [1 + rng.randrange(1 << 12) for _ in range(48)]
    s = BGStructure.build([Item(i, w) for i, w in enumerate(weights)], level=1)
    wire_direct(s)
    for total in [Rational(sum(weights)), Rational(sum(weights) * 5, 3), Rational(1 << 40)]:
        src = RandomSource(total.num % 97)
        counts = [0] * len(weights)
        for _ in range(TRIALS):
            for x in query(s, total, src):
                counts[x.id] += 1
        for i, w in enumerate(weights):
            p = min(1.0, float(Rational(w) / total))
            if p * TRIALS < 50:
                continue  # sparse cells are exercised by the acceptance suite
            assert freq_ok(counts[i], TRIALS, p), (i, w, counts[i], p)


def test_query_all_certain_returns_everything():
    weights = [3, 9, 17, 2000, 5]
    s = BGStructure.build([Item(i, w) for i, w in enumerate(weights)], level=1)
    wire_direct(s)
    src = RandomSource(3)
    for _ in range(300):
        assert len(query(s, Rational(1), src)) == len(weights)


def test_query_empty_structure():
    s = BGStructure.build([], level=1)
    src = RandomSource(4)
    assert query(s, Rational(5), src) == []


def test_extract_items_rate_one_bucket():
    # p = 1: every item gets a direct coin at its exact probability
    weights = [8, 9, 10, 15]
    s = BGStructure.build([Item(i, w) for i, w in enumerate(weights)], level=1)
    total = Rational(12)
    src = RandomSource(5)
    counts = [0] * 4
    for _ in range(TRIALS):
        out = []
        extract_items(s, [3], total, src, out)
        for x in out:
            counts[x.id] += 1
    for i, w in enumerate(weights):
        assert freq_ok(counts[i], TRIALS, min(1.0, w / 12))


def test_extract_items_small_rate_bucket_joint():
    # 4 items in one bucket, bucket rate p < 1.  Candidacy (the next-level coin
    # at min(1, p*n)) is simulated upstream, so the composed law must be the
    # product of independent Ber(w/total) coins.
    weights = [16, 17, 29, 31]
    s = BGStructure.build([Item(i, w) for i, w in enumerate(weights)], level=1)
    total = Rational(1 << 9)  # bucket majorant p = 2^5/2^9 = 1/16, p*n = 1/4
    from dpss.samplers import ber_rational

    src = RandomSource(6)
    counts = [0] * 4
    pair01 = 0
    for _ in range(TRIALS):
        out = []
        if ber_rational(src, Rational(1, 4)):
            extract_items(s, [4], total, src, out)
        got = {x.id for x in out}
        for i in got:
            counts[i] += 1
        if 0 in got and 1 in got:
            pair01 += 1
    for i, w in enumerate(weights):
        assert freq_ok(counts[i], TRIALS, w / 512)
    p01 = (weights[0] / 512) * (weights[1] / 512)
    se = math.sqrt(p01 * (1 - p01) / TRIALS)
    assert abs(pair01 / TRIALS - p01) <= 5 * se + 10 / TRIALS


def test_next_level_missing_raises():
    s = BGStructure.build([Item(0, 6), Item(1, 7)], level=1)
    src = RandomSource(7)
    with pytest.raises(RuntimeError):
        query(s, Rational(12), src)
