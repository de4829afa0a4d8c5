import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpss.rationals import (
    DyadicApprox,
    Rational,
    ceil_log2,
    dyadic_round,
    floor_log2,
    int_from_hex,
    int_pow,
    int_to_hex,
)


def test_add_example():
    assert Rational(1, 2) + Rational(1, 3) == Rational(5, 6)


def test_unreduced_equality():
    assert Rational(2, 4) == Rational(1, 2)
    assert Rational(2, 4).cmp(Rational(1, 2)) == 0


def test_inverse_identity_random():
    import random

    rng = random.Random(0)
    for _ in range(100):
        a = Rational(rng.randint(1, 10**12), rng.randint(1, 10**12))
        assert a * Rational(a.den, a.num) == Rational(1)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        Rational(1, 2) / Rational(0, 5)
    with pytest.raises(ZeroDivisionError):
        Rational(3, 0)


def test_negative_den_normalized():
    x = Rational(3, -4)
    assert x.den == 4 and x.num == -3


@given(
    st.integers(-(10**30), 10**30),
    st.integers(1, 10**30),
    st.integers(-(10**30), 10**30),
    st.integers(1, 10**30),
)
def test_add_sub_roundtrip(an, ad, bn, bd):
    a, b = Rational(an, ad), Rational(bn, bd)
    assert (a + b) - b == a


@given(
    st.integers(-(10**20), 10**20),
    st.integers(1, 10**20),
    st.integers(1, 10**20),
    st.integers(1, 10**20),
)
def test_mul_div_roundtrip(an, ad, bn, bd):
    a, b = Rational(an, ad), Rational(bn, bd)
    assert (a * b) / b == a


def test_int_pow_examples():
    assert int_pow(2, 10) == 1024
    assert int_pow(3, 0) == 1


def test_int_pow_schoolbook_oracle():
    def schoolbook(b, k):
        out = 1
        for _ in range(k):
            out *= b
        return out

    assert int_pow(10, 30) == schoolbook(10, 30)
    assert int_pow(7, 13) == schoolbook(7, 13)
    with pytest.raises(ValueError):
        int_pow(2, -1)


def test_hex_roundtrip():
    for v in [0, 1, -1, 2**200 + 12345, -(2**130)]:
        assert int_from_hex(int_to_hex(v)) == v
    x = Rational(-(2**70), 3)
    assert Rational.deserialize(x.serialize()) == x


def test_floor_ceil_log2_examples():
    assert floor_log2(Rational(5, 2)) == 1
    assert ceil_log2(Rational(5, 2)) == 2
    assert floor_log2(Rational(8)) == 3
    assert ceil_log2(Rational(8)) == 3
    assert floor_log2(Rational(1, 8)) == -3
    assert ceil_log2(Rational(1, 8)) == -3
    with pytest.raises(ValueError):
        floor_log2(Rational(0))
    with pytest.raises(ValueError):
        ceil_log2(Rational(-1, 2))


def _oracle_logs(x: Rational):
    # brute force: scan k and compare 2^k against x exactly
    bound = x.num.bit_length() + x.den.bit_length() + 2
    floor = None
    for k in range(-bound, bound + 1):
        if k >= 0:
            le = x.den << k <= x.num
        else:
            le = x.den <= x.num << -k
        if le:
            floor = k
    if k_is_exact(x, floor):
        return floor, floor
    return floor, floor + 1


def k_is_exact(x: Rational, k: int) -> bool:
    if k >= 0:
        return x.num == x.den << k
    return x.num << -k == x.den


def test_log2_against_bruteforce_oracle():
    import random

    rng = random.Random(42)
    for _ in range(2000):
        num = rng.randint(1, 2**128)
        den = rng.randint(1, 2**128)
        x = Rational(num, den)
        f, c = _oracle_logs(x)
        assert floor_log2(x) == f
        assert ceil_log2(x) == c
        assert Rational(1 << f, 1) <= x if f >= 0 else Rational(1, 1 << -f) <= x


def test_dyadic_round_examples():
    da = dyadic_round(Rational(1, 3), 4)
    assert (da.mantissa, da.bits) in [(5, 4), (6, 4)]
    da = dyadic_round(Rational(1, 2), 1)
    assert da.value == Rational(1, 2)
    with pytest.raises(ValueError):
        dyadic_round(Rational(5, 2), 4)


@settings(max_examples=300)
@given(st.integers(0, 10**18), st.integers(1, 10**18), st.integers(1, 64))
def test_dyadic_round_error_bound_exact(num, den, i):
    # map into [0, 2]
    if num > 2 * den:
        num = num % (2 * den)
    x = Rational(num, den)
    da = dyadic_round(x, i)
    err = da.value - x
    bound = Rational(1, 1 << i)
    assert -bound <= err <= bound
    assert da.bits <= i + 1


def test_float_conversion():
    assert float(Rational(1, 2)) == 0.5
    assert abs(float(Rational(1, 3)) - 1 / 3) < 1e-15
    big = Rational(2**300 + 17, 2**299)
    assert abs(float(big) - 2.0) < 1e-14
    assert float(Rational(0, 5)) == 0.0
    assert float(Rational(-3, 2)) == -1.5


def test_dyadic_approx_float():
    da = DyadicApprox(5, 4, 4)
    assert math.isclose(float(da), 5 / 16)


def test_fraction_agreement():
    import random

    rng = random.Random(9)
    for _ in range(200):
        a = Rational(rng.randint(-(10**6), 10**6), rng.randint(1, 10**6))
        b = Rational(rng.randint(-(10**6), 10**6), rng.randint(1, 10**6))
        fa, fb = Fraction(a.num, a.den), Fraction(b.num, b.den)
        assert Fraction((a + b).num, (a + b).den) == fa + fb
        assert Fraction((a - b).num, (a - b).den) == fa - fb
        assert Fraction((a * b).num, (a * b).den) == fa * fb
        assert (a.cmp(b) < 0) == (fa < fb)
