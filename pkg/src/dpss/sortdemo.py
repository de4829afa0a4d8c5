"""Integer sorting driven by a deletion-only subset sampler over power-of-two weights.

Each integer a becomes an item of weight 2^a (exponents distinct).  Repeatedly:
query the sampler with parameters (1, 0) until the sample is non-empty, pull
out the largest sampled item, delete it, and insert its exponent into the
output by insertion sort from the back.  The largest live item carries at least
half the total weight, so rounds need about two queries, samples average one
item, and insertions barely move: the loop sorts in near-linear time given an
O(1)-cost sampler.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .randomness import LazyUniform, RandomSource
from .rationals import Rational
from .samplers import PowerBracket, u_less_than_rational
from .bucketing import _bgeo_with_bracket


@dataclass
class SortStats:
    rounds: int = 0
    queries: int = 0
    total_sampled: int = 0
    swaps: int = 0
    per_round_queries: list[int] = field(default_factory=list)

    @property
    def mean_queries_per_round(self) -> float:
        return self.queries / self.rounds if self.rounds else 0.0

    @property
    def mean_sample_size(self) -> float:
        return self.total_sampled / self.queries if self.queries else 0.0


class ReferenceFloatDpss:
    """Deletion-only subset sampler for items with weights 2^a, exponents distinct.

    Queries are fixed at parameters (1, 0): item a is sampled independently
    with probability exactly 2^a / W, W = sum of all weights.  The top
    R = 2*ceil(log2 N0) + 1 ranked items get individual exact coins; every
    deeper rank has probability <= 1/(2 N0^2), so one bounded-geometric skip at
    rate 1/N0^2 with per-landing acceptance covers the tail.

    W is never materialized: with distinct exponents the sorted exponent list
    *is* its sparse binary representation, and any sum of powers strictly below
    a cutoff stays below the next power, so a window of the top exponents
    brackets W to one part in 2^window.  Coins compare a lazy uniform against
    such brackets, widening the window until decided (exactly, if the window
    reaches the full exponent span).
    """

    def __init__(self, items: list[tuple[int, int]]):
        if not items:
            raise ValueError("need at least one item")
        exps = [a for _, a in items]
        if len(set(exps)) != len(exps):
            raise ValueError("exponents must be distinct")
        for _, a in items:
            if a < 0:
                raise ValueError("exponents must be non-negative")
        self.exp_of = {i: a for i, a in items}
        if len(self.exp_of) != len(items):
            raise ValueError("ids must be distinct")
        self.id_of = {a: i for i, a in items}
        self.exps = sorted(exps, reverse=True)
        self.n0 = len(items)
        self.R = 2 * max(1, (self.n0 - 1).bit_length()) + 1
        self.rate_den = self.n0 * self.n0
        self._skip_bracket = PowerBracket(self.rate_den - 1, self.rate_den)

    def __len__(self) -> int:
        return len(self.exps)

    # -- the W window -------------------------------------------------------

    def _window(self, w: int, cache: dict) -> tuple[int, bool]:
        """(M, exact): W is in [M, M+1) * 2^(top - w); exact means W == M * 2^(top-w)."""
        got = cache.get(w)
        if got is not None:
            return got
        top = self.exps[0]
        cut = top - w
        m = 0
        exact = True
        for e in self.exps:
            if e >= cut:
                m += 1 << (e - cut)
            else:
                exact = False
                break
        cache[w] = (m, exact)
        return m, exact

    def _coin(self, src: RandomSource, a: int, mult: int, cache: dict) -> bool:
        """Exact Ber(mult * 2^a / W); requires mult * 2^a <= W."""
        top = self.exps[0]
        u = LazyUniform(src)
        w = 64
        while True:
            m, exact = self._window(w, cache)
            if exact:
                s = a - (top - w)
                if s >= 0:
                    p = Rational(mult << s, m)
                else:
                    p = Rational(mult, m << -s)
                return u_less_than_rational(u, p)
            prec = w
            shift = a - (top - w) + prec
            if shift < 0:
                lo, hi = 0, 1
            else:
                lo = (mult << shift) // (m + 1)
                hi = -((-(mult << shift)) // m)
            up = u.prefix(prec)
            if up + 1 <= lo:
                return True
            if up >= hi:
                return False
            w <<= 1

    # -- operations ----------------------------------------------------------

    def query(self, src: RandomSource) -> list[int]:
        """One exact (1, 0) subset sample; returns sampled ids."""
        if not self.exps:
            raise ValueError("empty structure")
        out = []
        cache: dict = {}
        exps = self.exps
        r_top = min(self.R, len(exps))
        for r in range(r_top):
            a = exps[r]
            if self._coin(src, a, 1, cache):
                out.append(self.id_of[a])
        tail = len(exps) - r_top
        if tail > 0:
            k = _bgeo_with_bracket(src, self._skip_bracket, tail + 1)
            while k <= tail:
                a = exps[r_top + k - 1]
                # accept with (2^a / W) / (1/n0^2) <= 1: rank > R bounds p by 1/(2 n0^2)
                if self._coin(src, a, self.rate_den, cache):
                    out.append(self.id_of[a])
                k += _bgeo_with_bracket(src, self._skip_bracket, tail + 1)
        return out

    def delete(self, item_id: int) -> None:
        a = self.exp_of.pop(item_id, None)
        if a is None:
            raise ValueError(f"unknown id {item_id}")
        del self.id_of[a]
        # exps is descending: binary search for a
        lo, hi = 0, len(self.exps)
        while lo < hi:
            mid = (lo + hi) >> 1
            if self.exps[mid] > a:
                lo = mid + 1
            else:
                hi = mid
        assert self.exps[lo] == a
        self.exps.pop(lo)

    def inclusion_probabilities(self) -> list[tuple[int, Rational]]:
        """Exact (id, 2^a/W) pairs; intended for small instances."""
        w = sum(1 << a for a in self.exps)
        return [(self.id_of[a], Rational(1 << a, w)) for a in self.exps]


def sort_via_dpss(values: list[int], src: RandomSource) -> tuple[list[int], SortStats]:
    """Sort distinct non-negative integers in descending order via the sampler."""
    if len(set(values)) != len(values):
        raise ValueError("integers must be distinct")
    d = ReferenceFloatDpss(list(enumerate(values)))
    stats = SortStats()
    out: list[int] = []
    while len(d):
        stats.rounds += 1
        tries = 0
        while True:
            tries += 1
            t = d.query(src)
            stats.total_sampled += len(t)
            if t:
                break
        stats.queries += tries
        stats.per_round_queries.append(tries)
        a_star = max(d.exp_of[i] for i in t)
        d.delete(d.id_of[a_star])
        j = len(out)
        while j > 0 and out[j - 1] < a_star:
            j -= 1
            stats.swaps += 1
        out.insert(j, a_star)
    return out, stats
