"""One-level bucket-grouping structure and its subset-sampling query algorithms.

Items live in buckets by weight magnitude (bucket i holds 2^i <= w < 2^(i+1));
buckets join groups of log2(N) consecutive indices.  A query classifies whole
groups as insignificant (max inclusion probability <= 1/N^2), certain (min
probability >= 1), or significant, and answers each class with a dedicated
exact sampler: one bounded-geometric skip, a plain scan, or rejection sampling
driven by a next-level structure.
"""

from __future__ import annotations

from dataclasses import dataclass

from .intset import BoundedIntSet
from .randomness import LazyUniform, RandomSource
from .rationals import Rational, ceil_log2, ceil_log2_int, floor_log2
from .samplers import (
    BoundedGeoSampler,
    Coin,
    PowerBracket,
    PowerCoin,
    TruncatedGeoSampler,
    _ber_scaled,
    ber_bracketed,
    compare_uniform_power,
    tgeo,
)

# buckets up to this size get cached table samplers for their geometric draws;
# larger ones use the binary-search inverse transform (no table build cost)
_TABLE_SAMPLER_MAX = 128

# Bucket/group index universes: level-3 weights reach 2^(64+64+log) at most,
# so indices stay well under this bound at every level.
INDEX_UNIVERSE = 192


def pad_pow2(n: int) -> int:
    """Smallest power of two >= max(n, 2): the conceptual padded instance size."""
    return 1 << max(1, ceil_log2_int(max(n, 1)))


class Item:
    """An id with a positive integer weight."""

    __slots__ = ("id", "weight")

    def __init__(self, id: int, weight: int):
        self.id = id
        self.weight = weight

    def __repr__(self) -> str:
        return f"Item({self.id}, w={self.weight})"


@dataclass(frozen=True)
class QueryParams:
    """The (alpha, beta) pair of a parameterized subset-sampling query."""

    alpha: Rational
    beta: Rational

    def __post_init__(self):
        if self.alpha.num < 0 or self.beta.num < 0:
            raise ValueError("alpha and beta must be non-negative")

    def total_weight(self, weight_sum: int) -> Rational:
        a, b = self.alpha, self.beta
        return Rational(a.num * weight_sum * b.den + b.num * a.den, a.den * b.den)


class Group:
    """A run of log2(N) consecutive bucket indices plus its next-level structure."""

    __slots__ = ("index", "bucket_count", "next_level")

    def __init__(self, index: int):
        self.index = index
        self.bucket_count = 0
        self.next_level = None


class DegenerateQueryError(ValueError):
    """Raised when the parameterized total weight is zero (probabilities undefined)."""


class BGStructure:
    """One level of bucket-grouping over a dynamic item set.

    N is the conceptual padded size, fixed at construction and chosen to cover
    the maximum live count this structure can see; padding is formula-only, no
    dummy items are stored.
    """

    __slots__ = (
        "level",
        "N",
        "L",
        "buckets",
        "groups",
        "nonempty_buckets",
        "nonempty_groups",
        "total_weight",
        "count",
        "locator",
        "_skip_coins",
        "_brackets",
        "_geo_tables",
    )

    def __init__(self, level: int, capacity: int):
        self.level = level
        self.N = pad_pow2(capacity)
        self.L = self.N.bit_length() - 1
        self.buckets: dict[int, list[Item]] = {}
        self.groups: dict[int, Group] = {}
        self.nonempty_buckets = BoundedIntSet(INDEX_UNIVERSE)
        self.nonempty_groups = BoundedIntSet(INDEX_UNIVERSE)
        self.total_weight = 0
        self.count = 0
        self.locator: dict[int, tuple[int, int]] = {}
        self._skip_coins: dict[tuple[int, int], PowerCoin] = {}
        self._brackets: dict[tuple[int, int], PowerBracket] = {}
        self._geo_tables: dict[tuple, object] = {}

    @classmethod
    def build(cls, items: list[Item], level: int, capacity: int | None = None) -> "BGStructure":
        s = cls(level, capacity if capacity is not None else len(items))
        for x in items:
            s.insert(x)
        return s

    # -- maintenance -------------------------------------------------------

    def bucket_index(self, weight: int) -> int:
        return weight.bit_length() - 1

    def insert(self, x: Item) -> tuple[int, int, int]:
        """Add an item; returns (bucket index, old size, new size)."""
        if x.weight < 1:
            raise ValueError("bucketed items need weight >= 1")
        if x.id in self.locator:
            raise ValueError(f"duplicate id {x.id}")
        i = x.weight.bit_length() - 1
        lst = self.buckets.get(i)
        if lst is None:
            lst = self.buckets[i] = []
        old = len(lst)
        lst.append(x)
        self.locator[x.id] = (i, old)
        self.total_weight += x.weight
        self.count += 1
        if old == 0:
            self.nonempty_buckets.insert(i)
            g = self._group(i // self.L)
            g.bucket_count += 1
            if g.bucket_count == 1:
                self.nonempty_groups.insert(g.index)
        return i, old, old + 1

    def delete(self, item_id: int) -> tuple[int, int, int, Item]:
        """Remove by id (swap-remove); returns (bucket, old size, new size, item)."""
        loc = self.locator.pop(item_id, None)
        if loc is None:
            raise ValueError(f"unknown id {item_id}")
        i, pos = loc
        lst = self.buckets[i]
        old = len(lst)
        x = lst[pos]
        last = lst.pop()
        if pos < len(lst):
            lst[pos] = last
            self.locator[last.id] = (i, pos)
        self.total_weight -= x.weight
        self.count -= 1
        if not lst:
            del self.buckets[i]
            self.nonempty_buckets.delete(i)
            j = i // self.L
            g = self.groups[j]
            g.bucket_count -= 1
            if g.bucket_count == 0:
                self.nonempty_groups.delete(j)
                if g.next_level is None:
                    del self.groups[j]
        return i, old, old - 1, x

    def _group(self, j: int) -> Group:
        g = self.groups.get(j)
        if g is None:
            g = self.groups[j] = Group(j)
        return g

    def bucket_size(self, i: int) -> int:
        lst = self.buckets.get(i)
        return len(lst) if lst else 0

    def next_item_weight(self, i: int) -> int:
        """Weight of this bucket's next-level item: 2^(i+1) * |bucket|."""
        return self.bucket_size(i) << (i + 1)

    def items(self) -> list[Item]:
        out = []
        for i in self.nonempty_buckets:
            out.extend(self.buckets[i])
        return out

    # -- query-time classification ------------------------------------------

    def classify(self, total: Rational) -> tuple[int, int]:
        """(j1, j2): groups <= j1 all-insignificant, >= j2 all-certain, rest between.

        j1 is the largest group whose every possible bucket index i satisfies
        2^(i+1)/W <= 1/N^2; j2 the smallest whose every bucket has 2^i/W >= 1.
        """
        if total.num <= 0:
            raise DegenerateQueryError("parameterized total weight must be positive")
        cw = floor_log2(total)
        j1 = cw // self.L - 3  # == floor((floor(log2(W/N^2)))/L) - 1 with N = 2^L
        c2 = ceil_log2(total)
        j2 = -((-c2) // self.L)
        return j1, j2

    def skip_coin(self, rate_num: int, rate_den: int) -> PowerCoin:
        """Cached Ber((1 - rate)^N): the no-hit branch of B-Geo(rate, N+1)."""
        key = (rate_num, rate_den)
        coin = self._skip_coins.get(key)
        if coin is None:
            coin = PowerCoin(rate_den - rate_num, rate_den, self.N)
            self._skip_coins[key] = coin
        return coin

    def power_bracket(self, num: int, den: int) -> PowerBracket:
        """Cached enclosure machinery for (num/den)**k; hot inside extraction."""
        key = (num, den)
        pb = self._brackets.get(key)
        if pb is None:
            if len(self._brackets) >= 64:
                self._brackets.clear()
            pb = self._brackets[key] = PowerBracket(num, den)
        return pb

    def geo_table(self, kind: str, pn: int, pd: int, n: int):
        """Cached exact table sampler for repeated geometric draws at one rate."""
        key = (kind, pn, pd, n)
        t = self._geo_tables.get(key)
        if t is None:
            if len(self._geo_tables) >= 64:
                self._geo_tables.clear()
            cls = BoundedGeoSampler if kind == "b" else TruncatedGeoSampler
            t = self._geo_tables[key] = cls(Rational(pn, pd), n)
        return t

    # -- level linkage (set by the owning hierarchy) --------------------------

    def sample_next(self, total: Rational, src: RandomSource) -> list[Item]:
        """Subset sample with parameters (0, total) on this structure's items."""
        return query(self, total, src)


def query(s: BGStructure, total: Rational, src: RandomSource) -> list[Item]:
    """Exact subset sample on s: each item included independently with
    probability min(w/total, 1)."""
    assert s.count <= s.N, "live count escaped the conceptual padded size"
    j1, j2 = s.classify(total)
    assert j2 - j1 - 1 <= 3, "more than three significant groups"
    out: list[Item] = []
    i1 = (j1 + 1) * s.L - 1
    if i1 >= 0:
        query_insignificant(s, total, i1, 1, s.N * s.N, src, out)
    i2 = j2 * s.L
    for i in s.nonempty_buckets.iter_from(max(0, i2)):
        out.extend(s.buckets[i])
    if j1 + 1 <= j2 - 1:
        for j in list(s.nonempty_groups.iter_range(max(0, j1 + 1), j2 - 1)):
            g = s.groups[j]
            nl = g.next_level
            if nl is None:
                raise RuntimeError(f"group {j} has no next-level structure")
            chosen = nl.sample_next(total, src)
            extract_items(s, [y.id for y in chosen], total, src, out)
    return out


def query_insignificant(
    s: BGStructure,
    total: Rational,
    i1: int,
    rate_num: int,
    rate_den: int,
    src: RandomSource,
    out: list[Item],
) -> None:
    """One bounded-geometric skip at the given rate over buckets with index <= i1.

    Every item in those buckets must have inclusion probability <= the rate;
    the first hit is corrected by rejection, later positions get direct coins.
    """
    first = s.nonempty_buckets.min()
    if first is None or first > i1:
        return
    if s.skip_coin(rate_num, rate_den).draw(src):
        return  # the B-Geo(rate, N+1) skip cleared all N conceptual slots
    k = tgeo(src, Rational(rate_num, rate_den), s.N)
    members: list[Item] = []
    for i in s.nonempty_buckets.iter_range(0, i1):
        members.extend(s.buckets[i])
    if k > len(members):
        return
    wn, wd = total.num, total.den
    x = members[k - 1]
    num = x.weight * wd * rate_den
    den = wn * rate_num
    assert num <= den, "insignificant bucket exceeds the skip rate"
    if num == den or (num and _ber_scaled(num, den, src)):
        out.append(x)
    for x in members[k:]:
        num = x.weight * wd
        if num >= wn or _ber_scaled(num, wn, src):
            out.append(x)


def _promising_coin(src: RandomSource, pb: PowerBracket, pn: int, pd: int, n_i: int) -> int:
    """Exact Ber((1 - (1-p)^n) / (p n)) for p = pn/pd < 1/n; pb encloses 1-p."""
    d = pn * n_i

    def bracket(prec: int) -> tuple[int, int]:
        qlo, qhi = pb.bracket(n_i, prec + 8)
        s = 1 << (prec + 8)
        lo = ((s - qhi) * pd) // (d << 8)
        hi = -((-(s - qlo) * pd) // (d << 8))
        return lo, hi

    def exact() -> Rational:
        return Rational(pd**n_i - (pd - pn) ** n_i, pn * n_i * pd ** (n_i - 1))

    return ber_bracketed(src, bracket, exact)


def _bgeo_with_bracket(src: RandomSource, pb: PowerBracket, n: int) -> int:
    """B-Geo(p, n) sharing a prepared bracket for 1-p (see samplers.bgeo)."""
    if n == 1:
        return 1
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


def extract_items(
    s: BGStructure,
    candidates: list[int],
    total: Rational,
    src: RandomSource,
    out: list[Item],
) -> None:
    """Rejection-sample items from candidate buckets.

    Each candidate bucket index i arrived with probability
    min(1, 2^(i+1)*|B(i)|/total); items inside are located by geometric skips at
    the bucket's majorant rate p = min(1, 2^(i+1)/total) and accepted with the
    exact ratio p_x/p, which is the dyadic w/2^(i+1) whenever p < 1.
    """
    wn, wd = total.num, total.den
    bits = src.bits
    for i in candidates:
        lst = s.buckets.get(i)
        if not lst:
            continue
        n_i = len(lst)
        pn = wd << (i + 1)
        if pn >= wn:
            # majorant rate 1: direct exact coins
            for x in lst:
                num = x.weight * wd
                if num >= wn or _ber_scaled(num, wn, src):
                    out.append(x)
            continue
        pb = s.power_bracket(wn - pn, wn)
        stepper = s.geo_table("b", pn, wn, n_i + 1) if n_i <= _TABLE_SAMPLER_MAX else None
        if pn * n_i >= wn:
            k = stepper.sample(src) if stepper else _bgeo_with_bracket(src, pb, n_i + 1)
            if k > n_i:
                continue
        else:
            if not _promising_coin(src, pb, pn, wn, n_i):
                continue
            if stepper is not None:
                k = s.geo_table("t", pn, wn, n_i).sample(src)
            else:
                k = tgeo(src, Rational(pn, wn), n_i)
        shift = i + 1
        while k <= n_i:
            x = lst[k - 1]
            if bits(shift) < x.weight:  # exact Ber(w / 2^(i+1)) = Ber(p_x / p)
                out.append(x)
            k += stepper.sample(src) if stepper else _bgeo_with_bracket(src, pb, n_i + 1)


class DirectSampler:
    """Definitional next-level sampler: one exact coin per item.

    Interchangeable with a recursive structure wherever a next level is needed;
    used as the ground-truth wiring in tests.
    """

    __slots__ = ("items_ref",)

    def __init__(self, items_ref: list[Item]):
        self.items_ref = items_ref

    def sample_next(self, total: Rational, src: RandomSource) -> list[Item]:
        wn, wd = total.num, total.den
        out = []
        for x in self.items_ref:
            num = x.weight * wd
            if num >= wn or _ber_scaled(num, wn, src):
                out.append(x)
        return out
