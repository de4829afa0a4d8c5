"""Exact rational arithmetic on arbitrary-precision integers.

Rationals are kept unreduced (no gcd on hot paths); denominators are always
positive and comparisons cross-multiply.  Python ints already are sign +
word-array long integers, so they serve directly as the multi-word integer
type; hex serialization helpers keep an unambiguous interchange format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def int_to_hex(x: int) -> str:
    """Serialize a (possibly huge) integer as sign prefix + lowercase hex."""
    if x < 0:
        return "-" + format(-x, "x")
    return format(x, "x")


def int_from_hex(s: str) -> int:
    s = s.strip()
    neg = s.startswith("-")
    if neg or s.startswith("+"):
        s = s[1:]
    v = int(s, 16)
    return -v if neg else v


def int_pow(base: int, k: int) -> int:
    """Exact base**k for k >= 0."""
    if k < 0:
        raise ValueError("negative exponent")
    return base**k


def ceil_log2_int(x: int) -> int:
    """Smallest c with 2**c >= x, for x >= 1."""
    if x < 1:
        raise ValueError("x must be positive")
    return (x - 1).bit_length()


class Rational:
    """An exact fraction num/den with den > 0, not reduced to lowest terms."""

    __slots__ = ("num", "den")

    def __init__(self, num: int, den: int = 1):
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            num, den = -num, -den
        self.num = num
        self.den = den

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other: "Rational") -> "Rational":
        return Rational(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other: "Rational") -> "Rational":
        return Rational(self.num * other.den - other.num * self.den, self.den * other.den)

    def __mul__(self, other: "Rational") -> "Rational":
        return Rational(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "Rational") -> "Rational":
        if other.num == 0:
            raise ZeroDivisionError("division by zero rational")
        return Rational(self.num * other.den, self.den * other.num)

    def __neg__(self) -> "Rational":
        return Rational(-self.num, self.den)

    # -- comparisons (value equality by cross-multiplication) -------------

    def cmp(self, other: "Rational") -> int:
        lhs = self.num * other.den
        rhs = other.num * self.den
        if lhs < rhs:
            return -1
        if lhs > rhs:
            return 1
        return 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Rational):
            return NotImplemented
        return self.cmp(other) == 0

    def __lt__(self, other: "Rational") -> bool:
        return self.cmp(other) < 0

    def __le__(self, other: "Rational") -> bool:
        return self.cmp(other) <= 0

    def __gt__(self, other: "Rational") -> bool:
        return self.cmp(other) > 0

    def __ge__(self, other: "Rational") -> bool:
        return self.cmp(other) >= 0

    def __hash__(self):
        # hash-compatible with value equality: reduce only here
        g = math.gcd(self.num, self.den)
        if g > 1:
            return hash((self.num // g, self.den // g))
        return hash((self.num, self.den))

    # -- views -------------------------------------------------------------

    @property
    def sign(self) -> int:
        return (self.num > 0) - (self.num < 0)

    def is_zero(self) -> bool:
        return self.num == 0

    def reduced(self) -> "Rational":
        g = math.gcd(self.num, self.den)
        return Rational(self.num // g, self.den // g) if g > 1 else self

    def __float__(self) -> float:
        n, d = self.num, self.den
        if n == 0:
            return 0.0
        # scale quotient near 2**64 so the integer division keeps 53+ bits
        sh = 64 - (n.bit_length() - d.bit_length())
        if sh >= 0:
            q = (n << sh) // d
        else:
            q = n // (d << -sh)
        return math.ldexp(q, -sh)

    def __repr__(self) -> str:
        return f"{self.num}/{self.den}"

    def serialize(self) -> str:
        return f"{int_to_hex(self.num)}/{int_to_hex(self.den)}"

    @classmethod
    def deserialize(cls, s: str) -> "Rational":
        num, den = s.split("/")
        return cls(int_from_hex(num), int_from_hex(den))


ZERO = Rational(0)
ONE = Rational(1)


def floor_log2(x: Rational) -> int:
    """Exact floor(log2(x)) for x > 0.

    Candidate from the highest-set-bit indices of numerator and denominator,
    resolved by one exact comparison against a power of two.
    """
    if x.num <= 0:
        raise ValueError("floor_log2 requires x > 0")
    c = x.num.bit_length() - x.den.bit_length()
    # x in (2**(c-1), 2**(c+1)); decide between c-1 and c
    if c >= 0:
        ge = x.num >= (x.den << c)
    else:
        ge = (x.num << -c) >= x.den
    return c if ge else c - 1


def ceil_log2(x: Rational) -> int:
    """Exact ceil(log2(x)) for x > 0."""
    f = floor_log2(x)
    if f >= 0:
        exact = x.num == (x.den << f)
    else:
        exact = (x.num << -f) == x.den
    return f if exact else f + 1


@dataclass(frozen=True)
class DyadicApprox:
    """A dyadic value mantissa/2**bits approximating a target to within 2**-precision."""

    mantissa: int
    bits: int
    precision: int

    @property
    def value(self) -> Rational:
        return Rational(self.mantissa, 1 << self.bits)

    def __float__(self) -> float:
        return math.ldexp(self.mantissa, -self.bits)


def dyadic_round(x: Rational, i: int) -> DyadicApprox:
    """Round x in [0, 2] to the nearest multiple of 2**-i (error <= 2**-(i+1))."""
    if x.num < 0 or x.num > 2 * x.den:
        raise ValueError("dyadic_round expects x in [0, 2]")
    m = ((x.num << (i + 1)) + x.den) // (2 * x.den)
    return DyadicApprox(m, i, i)
