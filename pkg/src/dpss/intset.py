"""Small-universe dynamic ordered integer set with O(1) updates and neighbor queries.

Four coupled parts: a bitmap (one Python int) for predecessor/successor by bit
tricks, a sorted doubly linked list for ordered iteration, a handle array with
swap-remove discipline, and a menu array mapping each member to its handle.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Optional


class _Node:
    __slots__ = ("value", "prev", "next")

    def __init__(self, value: int):
        self.value = value
        self.prev: Optional[_Node] = None
        self.next: Optional[_Node] = None


class BoundedIntSet:
    """Set of integers from [0, universe) supporting O(1)-style operations."""

    __slots__ = ("universe", "_bitmap", "_head", "_tail", "_handles", "_menu")

    def __init__(self, universe: int, members: Iterable[int] = ()):
        if universe <= 0:
            raise ValueError("universe must be positive")
        self.universe = universe
        self._bitmap = 0
        self._head: Optional[_Node] = None
        self._tail: Optional[_Node] = None
        self._handles: list[_Node] = []
        self._menu = [-1] * universe
        ms = sorted(members)
        prev: Optional[_Node] = None
        for v in ms:
            self._check_range(v)
            if self._bitmap >> v & 1:
                raise ValueError(f"duplicate member {v}")
            self._bitmap |= 1 << v
            node = _Node(v)
            node.prev = prev
            if prev is None:
                self._head = node
            else:
                prev.next = node
            self._menu[v] = len(self._handles)
            self._handles.append(node)
            prev = node
        self._tail = prev

    def _check_range(self, q: int) -> None:
        if not 0 <= q < self.universe:
            raise ValueError(f"{q} outside universe [0, {self.universe})")

    def __len__(self) -> int:
        return len(self._handles)

    def __contains__(self, q: int) -> bool:
        return 0 <= q < self.universe and (self._bitmap >> q) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        node = self._head
        while node is not None:
            yield node.value
            node = node.next

    def insert(self, q: int) -> None:
        self._check_range(q)
        if (self._bitmap >> q) & 1:
            raise ValueError(f"{q} already present")
        self._bitmap |= 1 << q
        node = _Node(q)
        self._menu[q] = len(self._handles)
        self._handles.append(node)
        s = self.successor(q + 1) if q + 1 < self.universe else None
        if s is None:
            node.prev = self._tail
            if self._tail is not None:
                self._tail.next = node
            else:
                self._head = node
            self._tail = node
        else:
            nxt = self._handles[self._menu[s]]
            node.next = nxt
            node.prev = nxt.prev
            if nxt.prev is not None:
                nxt.prev.next = node
            else:
                self._head = node
            nxt.prev = node

    def delete(self, q: int) -> None:
        self._check_range(q)
        if not (self._bitmap >> q) & 1:
            raise ValueError(f"{q} not present")
        self._bitmap &= ~(1 << q)
        idx = self._menu[q]
        node = self._handles[idx]
        if node.prev is not None:
            node.prev.next = node.next
        else:
            self._head = node.next
        if node.next is not None:
            node.next.prev = node.prev
        else:
            self._tail = node.prev
        last = self._handles.pop()
        if last is not node:
            self._handles[idx] = last
            self._menu[last.value] = idx
        self._menu[q] = -1

    def successor(self, q: int) -> Optional[int]:
        """Smallest member >= q, or None."""
        if q < 0:
            q = 0
        elif q >= self.universe:
            return None
        m = self._bitmap >> q
        if m == 0:
            return None
        return q + ((m & -m).bit_length() - 1)

    def predecessor(self, q: int) -> Optional[int]:
        """Largest member <= q, or None."""
        if q < 0:
            return None
        if q >= self.universe:
            q = self.universe - 1
        m = self._bitmap & ((1 << (q + 1)) - 1)
        if m == 0:
            return None
        return m.bit_length() - 1

    def min(self) -> Optional[int]:
        return self._head.value if self._head is not None else None

    def max(self) -> Optional[int]:
        return self._tail.value if self._tail is not None else None

    def iter_from(self, q: int) -> Iterator[int]:
        """Members >= q in ascending order, walking the linked list."""
        s = self.successor(q)
        if s is None:
            return
        node = self._handles[self._menu[s]]
        while node is not None:
            yield node.value
            node = node.next

    def iter_range(self, lo: int, hi: int) -> Iterator[int]:
        """Members in [lo, hi] ascending."""
        for v in self.iter_from(lo):
            if v > hi:
                return
            yield v

    def check(self) -> None:
        """Full structural audit; raises AssertionError on any broken invariant."""
        seen = []
        node = self._head
        prev = None
        while node is not None:
            assert node.prev is prev
            seen.append(node.value)
            prev = node
            node = node.next
        assert self._tail is prev
        assert seen == sorted(seen), "linked list not ascending"
        bits = [i for i in range(self.universe) if (self._bitmap >> i) & 1]
        assert seen == bits, "bitmap and list disagree"
        assert len(self._handles) == len(seen)
        for v in seen:
            idx = self._menu[v]
            assert 0 <= idx < len(self._handles)
            assert self._handles[idx].value == v, "menu/handle round-trip broken"
        for i in range(self.universe):
            if not (self._bitmap >> i) & 1:
                assert self._menu[i] == -1

    def words(self) -> int:
        """Logical word footprint: bitmap + menu + handles + list nodes."""
        return (self.universe + 63) // 64 + self.universe + len(self._handles) * 4
