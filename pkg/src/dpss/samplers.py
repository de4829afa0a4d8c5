"""Exact random variate generation: Bernoulli coins, bounded and truncated geometrics.

Every sampler here is distributionally exact.  Decisions are made by comparing
a lazily revealed uniform real against the target probability; when the target
is expensive to evaluate exactly, certified dyadic enclosures at escalating
precision decide almost every draw, and the exact rational value is only
materialized on the (geometrically unlikely) undecided path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .randomness import LazyUniform, RandomSource
from .rationals import DyadicApprox, Rational, dyadic_round

# Guard bits for interval power arithmetic: wide enough that exponents up to
# one word keep bracket widths far below one ulp of the requested precision.
_GUARD = 80

# Precision (bits of U) at which lazy deciders fall back to exact rationals.
EXACT_FALLBACK_BITS = 512


def _ceil_rshift(x: int, s: int) -> int:
    return -((-x) >> s)


# ---------------------------------------------------------------------------
# Rational Bernoulli
# ---------------------------------------------------------------------------


def _ber_scaled(num: int, den: int, src: RandomSource) -> int:
    """Ber(num/den) for 0 < num < den by 64-bit blocks of the uniform real."""
    bits = src.bits
    while True:
        num <<= 64
        t = num // den
        u = bits(64)
        if u < t:
            return 1
        if u > t:
            return 0
        num -= t * den
        if num == 0:
            return 0


def ber_rational(src: RandomSource, p: Rational) -> int:
    """Exact Bernoulli with rational success probability p in [0, 1]."""
    num, den = p.num, p.den
    if num < 0 or num > den:
        raise ValueError("probability outside [0, 1]")
    if num == 0:
        return 0
    if num == den:
        return 1
    return _ber_scaled(num, den, src)


class Coin:
    """Reusable exact Bernoulli coin; caches the leading 64-bit threshold."""

    __slots__ = ("num", "den", "_t", "_rem")

    def __init__(self, num: int, den: int):
        if num < 0 or den <= 0 or num > den:
            raise ValueError("probability outside [0, 1]")
        self.num = num
        self.den = den
        self._t = None
        self._rem = 0

    def draw(self, src: RandomSource) -> int:
        num, den = self.num, self.den
        if num == 0:
            return 0
        if num == den:
            return 1
        t = self._t
        if t is None:
            sc = num << 64
            self._t = t = sc // den
            self._rem = sc - t * den
        u = src.bits(64)
        if u < t:
            return 1
        if u > t:
            return 0
        if self._rem == 0:
            return 0
        return _ber_scaled(self._rem, den, src)


def u_less_than_rational(u: LazyUniform, x: Rational) -> bool:
    """Exact comparison U < x for x in [0, 1], consuming bits of U as needed."""
    num, den = x.num, x.den
    if num <= 0:
        return False
    if num >= den:
        return True
    seen = 0
    while True:
        num <<= 64
        t = num // den
        w = u.prefix(seen + 64) & ((1 << 64) - 1)
        if w < t:
            return True
        if w > t:
            return False
        num -= t * den
        if num == 0:
            return False
        seen += 64


# ---------------------------------------------------------------------------
# Certified brackets for base**k and coins built on them
# ---------------------------------------------------------------------------


class PowerBracket:
    """Certified dyadic enclosures of base**k for a fixed rational base in [0, 1].

    Enclosures are computed by outward-rounded fixed-point square-and-multiply
    over a cached squaring ladder, so lo/2**prec <= base**k <= hi/2**prec always
    holds and the width stays within a few ulp for any one-word exponent.
    """

    __slots__ = ("num", "den", "_ladders", "_memo")

    def __init__(self, num: int, den: int):
        if den <= 0 or num < 0 or num > den:
            raise ValueError("base outside [0, 1]")
        self.num = num
        self.den = den
        self._ladders: dict[int, list[tuple[int, int]]] = {}
        self._memo: dict[tuple[int, int], tuple[int, int]] = {}

    def _ladder(self, prec: int, upto: int) -> list[tuple[int, int]]:
        lad = self._ladders.get(prec)
        sh = prec + _GUARD
        if lad is None:
            scaled = self.num << sh
            lo = scaled // self.den
            hi = -((-scaled) // self.den)
            lad = [(lo, min(hi, 1 << sh))]
            self._ladders[prec] = lad
        while len(lad) <= upto:
            lo, hi = lad[-1]
            lad.append(((lo * lo) >> sh, min(_ceil_rshift(hi * hi, sh), 1 << sh)))
        return lad

    def bracket(self, k: int, prec: int) -> tuple[int, int]:
        """lo, hi at scale 2**prec with lo <= base**k * 2**prec <= hi."""
        if k == 0:
            return (1 << prec, 1 << prec)
        key = (k, prec)
        got = self._memo.get(key)
        if got is not None:
            return got
        sh = prec + _GUARD
        lad = self._ladder(prec, k.bit_length() - 1)
        lo = hi = None
        t = 0
        kk = k
        while kk:
            if kk & 1:
                l2, h2 = lad[t]
                if lo is None:
                    lo, hi = l2, h2
                else:
                    lo = (lo * l2) >> sh
                    hi = -((-(hi * h2)) >> sh)
            kk >>= 1
            t += 1
        out = (lo >> _GUARD, min(-((-hi) >> _GUARD), 1 << prec))
        if len(self._memo) >= 8192:
            self._memo.clear()
        self._memo[key] = out
        return out

    def exact(self, k: int) -> Rational:
        return Rational(self.num**k, self.den**k)


def compare_uniform_power(u: LazyUniform, pb: PowerBracket, k: int) -> bool:
    """Exact comparison U < base**k, shared-U safe across repeated calls."""
    if k == 0:
        return True
    prec = 64
    while prec <= EXACT_FALLBACK_BITS:
        lo, hi = pb.bracket(k, prec)
        up = u.prefix(prec)
        if up + 1 <= lo:
            return True
        if up >= hi:
            return False
        prec <<= 1
    return u_less_than_rational(u, pb.exact(k))


def ber_power(src: RandomSource, pb: PowerBracket, k: int) -> int:
    """Exact Ber(base**k) using a fresh uniform."""
    return 1 if compare_uniform_power(LazyUniform(src), pb, k) else 0


class PowerCoin:
    """Reusable exact Ber(base**k) coin with a cached 64-bit enclosure."""

    __slots__ = ("_pb", "k", "_lo", "_hi")

    def __init__(self, base_num: int, base_den: int, k: int):
        self._pb = PowerBracket(base_num, base_den)
        self.k = k
        self._lo, self._hi = self._pb.bracket(k, 64)

    def draw(self, src: RandomSource) -> int:
        u = src.bits(64)
        if u + 1 <= self._lo:
            return 1
        if u >= self._hi:
            return 0
        uo = LazyUniform(src)
        uo._val = u
        uo._n = 64
        return 1 if compare_uniform_power(uo, self._pb, self.k) else 0


def ber_bracketed(
    src: RandomSource,
    bracket_fn: Callable[[int], tuple[int, int]],
    exact_fn: Callable[[], Rational],
) -> int:
    """Exact Bernoulli from certified enclosures of the success probability.

    bracket_fn(prec) must return integers (lo, hi) with
    lo <= p * 2**prec <= hi; exact_fn() is only consulted past the precision cap.
    """
    u = LazyUniform(src)
    prec = 64
    while prec <= EXACT_FALLBACK_BITS:
        lo, hi = bracket_fn(prec)
        up = u.prefix(prec)
        if up + 1 <= lo:
            return 1
        if up >= hi:
            return 0
        prec <<= 1
    return 1 if u_less_than_rational(u, exact_fn()) else 0


# ---------------------------------------------------------------------------
# The i-bit approximation framework
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ApproximableProbability:
    """A probability known through i-bit approximations plus an exact fallback."""

    approx: Callable[[int], DyadicApprox]
    exact: Callable[[], Rational]


def ber_approx(src: RandomSource, ap: ApproximableProbability, cap: int = 256) -> int:
    """Exact Bernoulli for an approximable probability.

    Reveals bits of one uniform U and queries approximations at doubling
    precision; answers as soon as the enclosures separate, falling back to an
    exact rational comparison past `cap` revealed bits.
    """
    u = LazyUniform(src)
    i = 2
    while i <= cap:
        da = ap.approx(i)
        b, prec = da.bits, da.precision
        up = u.prefix(i)
        # common scale 2**(i+b); the approximation is within 2**-prec of p
        margin = 1 << (i + b - prec)
        p_sc = da.mantissa << i
        if ((up + 1) << b) <= p_sc - margin:
            return 1
        if (up << b) >= p_sc + margin:
            return 0
        i <<= 1
    return 1 if u_less_than_rational(u, ap.exact()) else 0


# ---------------------------------------------------------------------------
# p* = (1 - (1-q)^n) / (n q) and 1/(2 p*)
# ---------------------------------------------------------------------------


def _check_pstar_args(q: Rational, n: int) -> None:
    if n < 1:
        raise ValueError("n must be a positive integer")
    if q.num <= 0:
        raise ValueError("q must be positive")
    if n * q.num > q.den:
        raise ValueError("requires n*q <= 1")


def pstar_exact(q: Rational, n: int) -> Rational:
    """Exact p*: numerator B^n - (B-A)^n over denominator n*A*B^(n-1)."""
    _check_pstar_args(q, n)
    a, b = q.num, q.den
    return Rational(b**n - (b - a) ** n, n * a * b ** (n - 1))


def pstar_approx(q: Rational, n: int, i: int) -> DyadicApprox:
    """i-bit approximation of p* via the alternating-series partial sum.

    Sums the first min(n, i+2) terms a_j = (-1)^(j+1) q^(j-1) (n-1)!/(j!(n-j)!)
    exactly, then rounds to i+1 fractional bits; total error <= 2**-i.
    """
    _check_pstar_args(q, n)
    terms = min(n, i + 2)
    a, b = q.num, q.den
    s_num = 1
    a_num = 1
    den = 1
    for j in range(1, terms):
        mult = b * (j + 1)
        a_num *= -a * (n - j)
        s_num = s_num * mult + a_num
        den *= mult
    rounded = dyadic_round(Rational(s_num, den), i + 1)
    return DyadicApprox(rounded.mantissa, i + 1, i)


def pstar_probability(q: Rational, n: int) -> ApproximableProbability:
    return ApproximableProbability(
        approx=lambda i: pstar_approx(q, n, i),
        exact=lambda: pstar_exact(q, n),
    )


def ber_pstar(src: RandomSource, q: Rational, n: int) -> int:
    """Exact Ber(p*)."""
    return ber_approx(src, pstar_probability(q, n))


def half_inv_pstar_exact(q: Rational, n: int) -> Rational:
    p = pstar_exact(q, n)
    return Rational(p.den, 2 * p.num)


def half_inv_pstar_approx(q: Rational, n: int, i: int) -> DyadicApprox:
    """i-bit approximation of 1/(2 p*): reciprocal of an (i+2)-bit p*, rounded."""
    r = max(3, i + 2)
    da = pstar_approx(q, n, r)
    val = Rational(1 << (da.bits - 1), da.mantissa)
    rounded = dyadic_round(val, i + 1)
    return DyadicApprox(rounded.mantissa, i + 1, i)


def half_inv_pstar_probability(q: Rational, n: int) -> ApproximableProbability:
    return ApproximableProbability(
        approx=lambda i: half_inv_pstar_approx(q, n, i),
        exact=lambda: half_inv_pstar_exact(q, n),
    )


def ber_half_inv_pstar(src: RandomSource, q: Rational, n: int) -> int:
    """Exact Ber(1/(2 p*)); valid whenever n*q <= 1 (then p* >= 1 - 1/e >= 1/2)."""
    return ber_approx(src, half_inv_pstar_probability(q, n))


# ---------------------------------------------------------------------------
# Bounded geometric: min(n, Geo(p))
# ---------------------------------------------------------------------------


def _check_geo_args(p: Rational, n: int) -> None:
    if n < 1:
        raise ValueError("n must be a positive integer")
    if p.num <= 0 or p.num >= p.den:
        raise ValueError("p must lie strictly in (0, 1)")


def bgeo(src: RandomSource, p: Rational, n: int) -> int:
    """Exact B-Geo(p, n) = min(n, Geo(p)).

    Inverse transform on one lazy uniform: the variate is the smallest k with
    U >= (1-p)^k, located by binary search; all comparisons share U, so the
    result is an exact deterministic function of U.
    """
    _check_geo_args(p, n)
    if n == 1:
        return 1
    pb = PowerBracket(p.den - p.num, p.den)
    u = LazyUniform(src)
    if compare_uniform_power(u, pb, n - 1):
        return n
    lo, hi = 1, n - 1
    while lo < hi:
        mid = (lo + hi) >> 1
        if compare_uniform_power(u, pb, mid):
            lo = mid + 1
        else:
            hi = mid
    return lo


def bgeo_pmf(p: Rational, n: int) -> list[Rational]:
    """Exact pmf of B-Geo(p, n) over outcomes 1..n."""
    _check_geo_args(p, n)
    a, b = p.num, p.den
    out = []
    for i in range(1, n):
        out.append(Rational(a * (b - a) ** (i - 1), b**i))
    out.append(Rational((b - a) ** (n - 1), b ** (n - 1)))
    return out


class BoundedGeoSampler:
    """Table-backed B-Geo(p, n) sampler for one fixed parameter pair.

    One coin covers the probability-(1-p)^(n-1) overflow outcome n; interior
    outcomes are drawn from a flat table of dyadic cell counts, and the dyadic
    rounding residue is redistributed by an exact rational roulette, so every
    outcome keeps exactly its B-Geo probability.
    """

    __slots__ = ("p", "n", "_tail", "_cells", "_kbits", "_den", "_tsum")

    def __init__(self, p: Rational, n: int, table_bits: int | None = None):
        _check_geo_args(p, n)
        self.p = p
        self.n = n
        a, b = p.num, p.den
        self._tail = Coin((b - a) ** (n - 1), b ** (n - 1))
        if n == 1:
            self._cells = None
            return
        k = table_bits if table_bits is not None else max(6, (8 * (n - 1)).bit_length())
        self._kbits = k
        # interior pmf: pi_i = num*(b-a)^(i-1)*b^(n-1-i) / Z, Z = b^(n-1)-(b-a)^(n-1)
        zden = b ** (n - 1) - (b - a) ** (n - 1)
        self._den = zden
        cells = []
        num_i = a * b ** (n - 2)
        tsum = 0
        for i in range(1, n):
            t = (num_i << k) // zden
            if t:
                cells.extend([i] * t)
            tsum += t
            num_i = num_i * (b - a) // b
        self._tsum = tsum
        cells.extend([0] * ((1 << k) - tsum))
        self._cells = cells

    def sample(self, src: RandomSource) -> int:
        if self.n == 1:
            return 1
        if self._tail.draw(src):
            return self.n
        c = self._cells[src.below(1 << self._kbits)]
        if c:
            return c
        # exact residual roulette over r_i = pi_i - t_i/2^k
        a, b, n, k, zden = self.p.num, self.p.den, self.n, self._kbits, self._den
        rem = ((1 << k) - self._tsum) * zden
        num_i = a * b ** (n - 2)
        for i in range(1, n - 1):
            t = (num_i << k) // zden
            r = (num_i << k) - t * zden
            if r and ber_rational(src, Rational(r, rem)):
                return i
            rem -= r
            num_i = num_i * (b - a) // b
        return n - 1


class TruncatedGeoSampler:
    """Table-backed T-Geo(p, n) sampler for one fixed parameter pair.

    Same construction as the bounded sampler's interior: outcome k has exact
    probability p(1-p)^(k-1)/(1-(1-p)^n) = num_k / Z over one common
    denominator, split into dyadic table cells plus an exact residual roulette.
    """

    __slots__ = ("p", "n", "_cells", "_kbits", "_den", "_tsum")

    def __init__(self, p: Rational, n: int, table_bits: int | None = None):
        _check_geo_args(p, n)
        self.p = p
        self.n = n
        if n == 1:
            self._cells = None
            return
        a, b = p.num, p.den
        k = table_bits if table_bits is not None else max(6, (8 * n).bit_length())
        self._kbits = k
        zden = b**n - (b - a) ** n
        self._den = zden
        cells = []
        num_i = a * b ** (n - 1)
        tsum = 0
        for i in range(1, n + 1):
            t = (num_i << k) // zden
            if t:
                cells.extend([i] * t)
            tsum += t
            num_i = num_i * (b - a) // b
        self._tsum = tsum
        cells.extend([0] * ((1 << k) - tsum))
        self._cells = cells

    def sample(self, src: RandomSource) -> int:
        if self.n == 1:
            return 1
        c = self._cells[src.below(1 << self._kbits)]
        if c:
            return c
        a, b, n, k, zden = self.p.num, self.p.den, self.n, self._kbits, self._den
        rem = ((1 << k) - self._tsum) * zden
        num_i = a * b ** (n - 1)
        for i in range(1, n):
            t = (num_i << k) // zden
            r = (num_i << k) - t * zden
            if r and ber_rational(src, Rational(r, rem)):
                return i
            rem -= r
            num_i = num_i * (b - a) // b
        return n


# ---------------------------------------------------------------------------
# Truncated geometric
# ---------------------------------------------------------------------------


def tgeo(src: RandomSource, p: Rational, n: int) -> int:
    """Exact T-Geo(p, n): Pr[i] = p(1-p)^(i-1) / (1 - (1-p)^n) on {1..n}."""
    _check_geo_args(p, n)
    if n == 1:
        return 1
    num, den = p.num, p.den
    if n == 2:
        # Pr[1] = 1/(2-p), Pr[2] = (1-p)/(2-p)
        return 1 + ber_rational(src, Rational(den - num, 2 * den - num))
    if n * num >= den:
        # rejection from the bounded geometric: retry until the value lands
        while True:
            i = bgeo(src, p, n + 1)
            if i <= n:
                return i
    # n >= 3 and n*p < 1: uniform proposals thinned by a (1-p)^(i-1) filter and
    # a 1/(2p*) acceptance coin; each round accepts with probability exactly 1/2.
    # A sequential scan that keeps the first accepted index of a multi-proposal
    # round would bias small outcomes, so each round proposes exactly one index.
    pb = PowerBracket(den - num, den)
    while True:
        i = src.below(n) + 1
        if compare_uniform_power(LazyUniform(src), pb, i - 1) and ber_half_inv_pstar(src, p, n):
            return i


def tgeo_pmf(p: Rational, n: int) -> list[Rational]:
    """Exact pmf of T-Geo(p, n) over outcomes 1..n."""
    _check_geo_args(p, n)
    a, b = p.num, p.den
    z = b**n - (b - a) ** n
    return [Rational(a * (b - a) ** (i - 1) * b ** (n - i), z) for i in range(1, n + 1)]
