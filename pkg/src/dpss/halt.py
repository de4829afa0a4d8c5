"""Three-level dynamic subset-sampling hierarchy with adapters and a lookup table.

Level 1 buckets the live items; each level-1 group's buckets become weighted
items of a level-2 structure, and likewise down to level 3.  Final-level
queries are answered by reading the instance's adapter (a compact window of
bucket sizes) as a configuration into a static lookup table whose rows encode
every subset-sample outcome with exact multiplicity.  Updates touch one bucket
per level plus one adapter cell; global rebuilds keep the size envelope.
"""

from __future__ import annotations

import math
import os

from .bucketing import (
    BGStructure,
    DegenerateQueryError,
    Item,
    extract_items,
    query,
    query_insignificant,
)
from .randomness import RandomSource
from .rationals import Rational, ceil_log2, ceil_log2_int, floor_log2
from .samplers import _ber_scaled, ber_rational

TABLE_BUDGET_ENV = "DPSS_TABLE_BUDGET_WORDS"
MAX_WEIGHT = 1 << 64


class LookupTable:
    """Static answer table for the fixed-form subset-sampling problem.

    Row c holds (m^2)^K cells of K-bit results; result r occupies exactly
    Pr(r) * (m^2)^K cells, where slot j (1-based) is sampled with probability
    min(1, 2^(j+1) * c_j / m^2).  Sampling is one uniform cell pick.
    """

    __slots__ = ("K", "m", "rows", "cells_per_row")

    def __init__(self, K: int, m: int):
        if K < 1 or m < 2:
            raise ValueError("need K >= 1 and m >= 2")
        if K > 8:
            raise ValueError("slot count beyond one byte per cell is not supported")
        self.K = K
        self.m = m
        m2 = m * m
        self.cells_per_row = m2**K
        rows: list[bytes] = []
        for cfg_index in range((m + 1) ** K):
            probs = []
            c = cfg_index
            for t in range(K):
                ct = c % (m + 1)
                c //= m + 1
                probs.append(min(m2, ct << (t + 2)))  # numerator of p_(t+1) over m^2
            row = bytearray()
            total = 0
            for r in range(1 << K):
                mult = 1
                for t in range(K):
                    mult *= probs[t] if (r >> t) & 1 else m2 - probs[t]
                if mult:
                    row += bytes([r]) * mult
                total += mult
            assert total == self.cells_per_row, "row multiplicities must sum to (m^2)^K"
            rows.append(bytes(row))
        self.rows = rows

    @staticmethod
    def bits_needed(K: int, m: int) -> int:
        return (m + 1) ** K * (m * m) ** K * K

    def row_index(self, cfg: list[int]) -> int:
        idx = 0
        for t in range(self.K - 1, -1, -1):
            idx = idx * (self.m + 1) + cfg[t]
        return idx

    def sample(self, cfg: list[int], src: RandomSource) -> int:
        """One K-bit result for configuration cfg, with exact probabilities."""
        if len(cfg) != self.K or any(not 0 <= c <= self.m for c in cfg):
            raise ValueError("malformed configuration")
        row = self.rows[self.row_index(cfg)]
        return row[src.below(self.cells_per_row)]

    def words(self) -> int:
        return (len(self.rows) * self.cells_per_row * self.K + 63) // 64


class Adapter:
    """Compact window of final-level bucket sizes over the only occupiable range."""

    __slots__ = ("l1", "counts")

    def __init__(self, l1: int, width: int):
        self.l1 = l1
        self.counts = [0] * width

    @property
    def l2(self) -> int:
        return self.l1 + len(self.counts) - 1

    def get(self, i: int) -> int:
        off = i - self.l1
        if 0 <= off < len(self.counts):
            return self.counts[off]
        return 0

    def set(self, i: int, v: int) -> None:
        off = i - self.l1
        assert 0 <= off < len(self.counts), f"bucket index {i} outside adapter window"
        self.counts[off] = v

    def words(self) -> int:
        return len(self.counts) + 1


class FinalLevel:
    """A level-3 structure plus its adapter; serves next-level queries for one
    level-2 group."""

    __slots__ = ("structure", "adapter", "owner")

    def __init__(self, structure: BGStructure, adapter: Adapter, owner: "HaltStructure"):
        self.structure = structure
        self.adapter = adapter
        self.owner = owner

    def sample_next(self, total: Rational, src: RandomSource):
        return self.owner.query_final_level(self, total, src)


class HaltStructure:
    """Dynamic parameterized subset sampling over items with integer weights.

    Supports build, insert, delete, and exact queries: given (alpha, beta),
    each live item x is returned independently with probability
    min(w(x) / (alpha * total_weight + beta), 1).
    """

    def __init__(
        self,
        items=(),
        *,
        use_table: bool = True,
        table_budget_words: int | None = None,
        auto_rebuild: bool = True,
        n0_hint: int | None = None,
    ):
        self.use_table = use_table
        self.table_budget_words = table_budget_words
        self.auto_rebuild = auto_rebuild
        self._build(list(items), n0_hint=n0_hint)

    # -- construction --------------------------------------------------------

    def _build(self, pairs: list[tuple[int, int]], n0_hint: int | None = None) -> None:
        n0 = max(1, n0_hint if n0_hint is not None else len(pairs))
        self.n0 = n0
        self.m = max(2, ceil_log2_int(max(2, ceil_log2_int(max(2, n0)))))
        self.K = max(1, ceil_log2_int(self.m * self.m))
        budget = self.table_budget_words
        if budget is None:
            env = os.environ.get(TABLE_BUDGET_ENV)
            budget = int(env) if env else 4 * n0
        k_eff = self.K
        while k_eff >= 1 and LookupTable.bits_needed(k_eff, self.m) > budget * 64:
            k_eff -= 1
        self.K_eff = k_eff
        self.table = LookupTable(k_eff, self.m) if (self.use_table and k_eff >= 1) else None
        # the rebuild envelope caps the live count at 2*n0, so the conceptual
        # padded size covers every state a query can observe
        self.level1 = BGStructure(level=1, capacity=2 * n0)
        self.zero_weight: set[int] = set()
        for item_id, w in pairs:
            self._apply_insert(item_id, w)

    # -- public api ------------------------------------------------------------

    def __len__(self) -> int:
        return self.level1.count + len(self.zero_weight)

    @property
    def total_weight(self) -> int:
        return self.level1.total_weight

    def ids(self) -> list[int]:
        return [x.id for x in self.level1.items()] + sorted(self.zero_weight)

    def pairs(self) -> list[tuple[int, int]]:
        live = [(x.id, x.weight) for x in self.level1.items()]
        live.extend((i, 0) for i in sorted(self.zero_weight))
        return live

    def insert(self, item_id: int, weight: int) -> None:
        if not 0 <= weight < MAX_WEIGHT:
            raise ValueError("weight must be a one-word non-negative integer")
        self._apply_insert(item_id, weight)
        if self.auto_rebuild:
            self._maybe_rebuild()

    def delete(self, item_id: int) -> None:
        self._apply_delete(item_id)
        if self.auto_rebuild:
            self._maybe_rebuild()

    def query(self, alpha: Rational, beta: Rational, src: RandomSource) -> list[int]:
        """One exact parameterized subset sample; returns the selected ids."""
        if alpha.num < 0 or beta.num < 0:
            raise ValueError("alpha and beta must be non-negative")
        total = Rational(
            alpha.num * self.level1.total_weight * beta.den + beta.num * alpha.den,
            alpha.den * beta.den,
        )
        if total.num == 0:
            raise DegenerateQueryError("alpha*sum(w) + beta must be positive")
        return [x.id for x in query(self.level1, total, src)]

    def inclusion_probability(self, weight: int, alpha: Rational, beta: Rational) -> Rational:
        total = Rational(
            alpha.num * self.level1.total_weight * beta.den + beta.num * alpha.den,
            alpha.den * beta.den,
        )
        if total.num == 0:
            raise DegenerateQueryError("alpha*sum(w) + beta must be positive")
        p = Rational(weight * total.den, total.num)
        return p if p.num <= p.den else Rational(1)

    def expected_sample_size(self, alpha: Rational, beta: Rational) -> Rational:
        mu = Rational(0)
        for x in self.level1.items():
            mu = mu + self.inclusion_probability(x.weight, alpha, beta)
        return mu

    def rebuild(self) -> None:
        """Global rebuild from the live items; resets the size envelope."""
        self._build(self.pairs())

    # -- updates -----------------------------------------------------------------

    def _maybe_rebuild(self) -> None:
        n = len(self)
        if 2 * n < self.n0 or n > 2 * self.n0:
            self.rebuild()

    def _apply_insert(self, item_id: int, weight: int) -> None:
        if item_id in self.zero_weight or item_id in self.level1.locator:
            raise ValueError(f"duplicate id {item_id}")
        if weight == 0:
            self.zero_weight.add(item_id)
            return
        i, old, new = self.level1.insert(Item(item_id, weight))
        self._cascade_level1(i, old, new)

    def _apply_delete(self, item_id: int) -> None:
        if item_id in self.zero_weight:
            self.zero_weight.discard(item_id)
            return
        i, old, new, _ = self.level1.delete(item_id)
        self._cascade_level1(i, old, new)

    def _cascade_level1(self, i: int, old: int, new: int) -> None:
        """A level-1 bucket changed size: refresh its next-level item."""
        lvl1 = self.level1
        j = i // lvl1.L
        g = lvl1.groups.get(j)
        if g is None:
            g = lvl1._group(j)
        lvl2 = g.next_level
        if lvl2 is None:
            if new == 0:
                return
            lvl2 = g.next_level = BGStructure(level=2, capacity=lvl1.L)
        if old > 0:
            i2, o2, n2, _ = lvl2.delete(i)
            self._cascade_level2(lvl2, i2, o2, n2)
        if new > 0:
            i2, o2, n2 = lvl2.insert(Item(i, new << (i + 1)))
            self._cascade_level2(lvl2, i2, o2, n2)
        if lvl2.count == 0:
            g.next_level = None
            if g.bucket_count == 0:
                del lvl1.groups[j]

    def _cascade_level2(self, lvl2: BGStructure, i2: int, old: int, new: int) -> None:
        k = i2 // lvl2.L
        g = lvl2.groups.get(k)
        if g is None:
            g = lvl2._group(k)
        fl = g.next_level
        if fl is None:
            if new == 0:
                return
            width = lvl2.L + max(0, self.level1.L.bit_length() - 1)
            fl = g.next_level = FinalLevel(
                BGStructure(level=3, capacity=lvl2.L),
                Adapter(k * lvl2.L + 1, width),
                self,
            )
        z = fl.structure
        if old > 0:
            i3, _, n3, _ = z.delete(i2)
            fl.adapter.set(i3, n3)
        if new > 0:
            i3, _, n3 = z.insert(Item(i2, new << (i2 + 1)))
            fl.adapter.set(i3, n3)
        if z.count == 0:
            g.next_level = None
            if g.bucket_count == 0:
                del lvl2.groups[k]

    # -- the final level ------------------------------------------------------------

    def query_final_level(self, fl: FinalLevel, total: Rational, src: RandomSource) -> list[Item]:
        """Answer a (0, total) subset-sampling query on one final-level instance.

        Buckets at most 2/m^2 likely go through the geometric skip; certain
        buckets are scanned; the middle window is read from the adapter as a
        table configuration, with a per-bit rejection correcting the table's
        probability down to the true one.  Middle buckets the table cannot
        cover (slot overflow or no table) take an equivalent direct coin.
        """
        s = fl.structure
        if s.count == 0:
            return []
        m2 = self.m * self.m
        wn, wd = total.num, total.den
        i1 = floor_log2(Rational(wn, wd * m2))
        i2 = ceil_log2(total)
        out: list[Item] = []
        if i1 >= 0:
            query_insignificant(s, total, i1, 2, m2, src, out)
        for i in s.nonempty_buckets.iter_from(max(0, i2)):
            out.extend(s.buckets[i])
        lo = max(i1 + 1, 0)
        width = i2 - lo
        if width > 0:
            adapter = fl.adapter
            candidates: list[int] = []
            direct_from = lo
            if self.table is not None:
                kt = min(width, self.K_eff)
                cfg = [0] * self.K_eff
                overflow: list[int] = []
                for t in range(kt):
                    c = adapter.get(lo + t)
                    if c <= self.m:
                        cfg[t] = c
                    else:
                        overflow.append(lo + t)  # counts beyond m: direct path
                r = self.table.sample(cfg, src)
                t = 0
                while r:
                    if r & 1:
                        self._accept_table_bit(t, lo, cfg[t], m2, wn, wd, src, candidates)
                    r >>= 1
                    t += 1
                for i in overflow:
                    self._direct_candidate(i, adapter.get(i), wn, wd, src, candidates)
                direct_from = lo + kt
            for i in range(direct_from, i2):
                c = adapter.get(i)
                if c:
                    self._direct_candidate(i, c, wn, wd, src, candidates)
            extract_items(s, candidates, total, src, out)
        return out

    def _accept_table_bit(
        self,
        t: int,
        lo: int,
        c: int,
        m2: int,
        wn: int,
        wd: int,
        src: RandomSource,
        candidates: list[int],
    ) -> None:
        """Keep a table-sampled slot with probability (true p) / (table p)."""
        i = lo + t
        pj_num = min(m2, c << (t + 2))
        wv = c << (i + 1)
        num = wv * wd
        if num >= wn:
            rn, rd = m2, pj_num
        else:
            rn, rd = num * m2, wn * pj_num
        assert rn <= rd, "table slot probability must majorize the true one"
        assert 2 * rn >= rd, "table acceptance ratio fell below 1/2"
        if rn == rd or _ber_scaled(rn, rd, src):
            candidates.append(i)

    def _direct_candidate(
        self, i: int, c: int, wn: int, wd: int, src: RandomSource, candidates: list[int]
    ) -> None:
        """Exact bucket-level coin min(1, 2^(i+1)*c/total): the table-free path."""
        num = (c << (i + 1)) * wd
        if num >= wn or _ber_scaled(num, wn, src):
            candidates.append(i)

    # -- auditing ---------------------------------------------------------------

    def audit(self) -> dict:
        """Full-scan verification of every structural invariant; returns stats."""
        lvl1 = self.level1
        self._audit_bg(lvl1)
        n = len(self)
        assert self.n0 // 2 <= n <= 2 * self.n0 or n == 0, "size escaped the rebuild envelope"
        assert not (set(self.zero_weight) & set(lvl1.locator)), "id in both zero set and buckets"
        adapters = 0
        finals = 0
        for j, g in lvl1.groups.items():
            lvl2 = g.next_level
            expect = {
                i: lvl1.next_item_weight(i)
                for i in lvl1.nonempty_buckets.iter_range(j * lvl1.L, (j + 1) * lvl1.L - 1)
            }
            if lvl2 is None:
                assert not expect, f"level-1 group {j} misses its next level"
                continue
            got = {x.id: x.weight for x in lvl2.items()}
            assert got == expect, f"level-2 item set of group {j} out of sync"
            self._audit_bg(lvl2)
            for k, g2 in lvl2.groups.items():
                fl = g2.next_level
                expect2 = {
                    i: lvl2.next_item_weight(i)
                    for i in lvl2.nonempty_buckets.iter_range(k * lvl2.L, (k + 1) * lvl2.L - 1)
                }
                if fl is None:
                    assert not expect2, f"level-2 group {k} misses its final level"
                    continue
                finals += 1
                z = fl.structure
                got2 = {x.id: x.weight for x in z.items()}
                assert got2 == expect2, f"final-level item set of group {k} out of sync"
                self._audit_bg(z)
                assert z.count <= self.m, "final-level instance larger than m"
                ad = fl.adapter
                adapters += 1
                for i in z.nonempty_buckets:
                    assert ad.l1 <= i <= ad.l2, "occupied bucket outside adapter window"
                for off, cval in enumerate(ad.counts):
                    assert cval == z.bucket_size(ad.l1 + off), "adapter count out of sync"
                bound = 2 * self._loglog_bound() + 1
                assert len(ad.counts) <= bound, (
                    f"adapter window {len(ad.counts)} exceeds bound {bound}"
                )
        return {
            "items": n,
            "final_levels": finals,
            "adapters": adapters,
            "words": self.words(),
        }

    def _loglog_bound(self) -> int:
        # ceil(log2 log2 n0), floored at 1: below n0 = 5 the double log
        # degenerates while two distinct final-level weights already need
        # a two-wide window
        inner = math.log2(max(2, self.n0))
        return max(1, math.ceil(math.log2(max(1.0, inner))))

    @staticmethod
    def _audit_bg(s: BGStructure) -> None:
        s.nonempty_buckets.check()
        s.nonempty_groups.check()
        total = 0
        count = 0
        group_counts: dict[int, int] = {}
        for i, lst in s.buckets.items():
            assert lst, f"empty bucket {i} left in dict"
            assert i in s.nonempty_buckets, f"bucket {i} missing from index set"
            group_counts[i // s.L] = group_counts.get(i // s.L, 0) + 1
            for pos, x in enumerate(lst):
                assert (1 << i) <= x.weight < (1 << (i + 1)), "item in wrong bucket"
                assert s.locator[x.id] == (i, pos), "locator out of sync"
                total += x.weight
                count += 1
        assert set(s.buckets) == set(s.nonempty_buckets), "bucket index set drift"
        assert total == s.total_weight, "total weight drift"
        assert count == s.count == len(s.locator), "count drift"
        for j, g in s.groups.items():
            assert g.bucket_count == group_counts.get(j, 0), "group bucket count drift"
        assert {j for j, c in group_counts.items() if c} == set(s.nonempty_groups)

    def words(self) -> int:
        """Logical words held by the whole structure (audited by traversal)."""
        w = 8  # scalars
        w += 2 * len(self.zero_weight)
        w += self.table.words() if self.table is not None else 0

        def bg_words(s: BGStructure) -> int:
            ww = 8
            ww += s.nonempty_buckets.words() + s.nonempty_groups.words()
            ww += 3 * len(s.locator)
            for lst in s.buckets.values():
                ww += 2 + 3 * len(lst)  # list slot + (id, weight) per item
            ww += 4 * len(s.groups)
            return ww

        w += bg_words(self.level1)
        for g in self.level1.groups.values():
            if g.next_level is None:
                continue
            w += bg_words(g.next_level)
            for g2 in g.next_level.groups.values():
                fl = g2.next_level
                if fl is None:
                    continue
                w += bg_words(fl.structure) + fl.adapter.words()
        return w


class SmoothedDpss:
    """Update-time-smoothed wrapper: global rebuilds run as incremental work.

    The active structure absorbs every update (so queries stay exact at all
    times); when its size drifts past gentle thresholds, a shadow structure is
    fed a few construction steps per update from a frozen snapshot plus a
    replay log, then swapped in.  The snapshot list copy is the one bulk
    memory operation left on the update path.
    """

    def __init__(self, items=(), steps_per_update: int = 8, **kwargs):
        if steps_per_update < 2:
            raise ValueError("needs at least 2 construction steps per update")
        self.steps = steps_per_update
        self.kwargs = kwargs
        self.active = HaltStructure(items, auto_rebuild=False, **kwargs)
        self._snapshot: list[tuple[int, int]] | None = None
        self._cursor = 0
        self._log: list[tuple[str, int, int]] = []
        self._shadow: HaltStructure | None = None

    def __len__(self):
        return len(self.active)

    def query(self, alpha: Rational, beta: Rational, src: RandomSource) -> list[int]:
        return self.active.query(alpha, beta, src)

    def insert(self, item_id: int, weight: int) -> None:
        self.active.insert(item_id, weight)
        self._after_update(("ins", item_id, weight))

    def delete(self, item_id: int) -> None:
        self.active.delete(item_id)
        self._after_update(("del", item_id, 0))

    def _after_update(self, op: tuple[str, int, int]) -> None:
        if self._shadow is None:
            n, n0 = len(self.active), self.active.n0
            if 3 * n > 5 * n0 or 5 * n < 3 * n0:
                self._snapshot = self.active.pairs()
                self._cursor = 0
                self._log = []
                self._shadow = HaltStructure(
                    (), auto_rebuild=False, n0_hint=len(self._snapshot), **self.kwargs
                )
            return
        self._log.append(op)
        self._pump()

    def _pump(self) -> None:
        shadow = self._shadow
        budget = self.steps
        snap = self._snapshot
        while budget and self._cursor < len(snap):
            item_id, w = snap[self._cursor]
            shadow._apply_insert(item_id, w)
            self._cursor += 1
            budget -= 1
        while budget and self._log and self._cursor >= len(snap):
            kind, item_id, w = self._log.pop(0)
            if kind == "ins":
                shadow._apply_insert(item_id, w)
            else:
                shadow._apply_delete(item_id)
            budget -= 1
        if self._cursor >= len(snap) and not self._log:
            self.active = shadow
            self._shadow = None
            self._snapshot = None
