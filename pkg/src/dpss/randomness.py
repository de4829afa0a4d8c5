"""Seedable uniform entropy: 64-bit words, bounded integers, lazy uniform reals.

Every sampler in the package draws through a RandomSource handle; identical
seeds give byte-identical streams.
"""

from __future__ import annotations

import random as _stdrandom

WORD_BITS = 64


class RandomSource:
    """Deterministic stream of uniform random bits (single-owner per thread)."""

    __slots__ = ("seed", "_gen", "bits")

    def __init__(self, seed: int):
        self.seed = seed
        self._gen = _stdrandom.Random(seed)
        # bound method, exposed directly: this is the hottest call in the package
        self.bits = self._gen.getrandbits

    def word(self) -> int:
        """One uniform 64-bit word."""
        return self.bits(WORD_BITS)

    def below(self, m: int) -> int:
        """Uniform integer in [0, m), exact via power-of-two masking + rejection."""
        if m <= 0:
            raise ValueError("m must be positive")
        if m == 1:
            return 0
        k = (m - 1).bit_length()
        bits = self.bits
        while True:
            r = bits(k)
            if r < m:
                return r

    def spawn(self, index: int) -> "RandomSource":
        """Derived source for sharded work; deterministic in (seed, index)."""
        return RandomSource((self.seed * 0x9E3779B97F4A7C15 + index + 1) & (2**64 - 1))


class LazyUniform:
    """Binary expansion of one uniform U in [0,1), revealed MSB-first on demand.

    Bits are cached: every revealed bit is fixed forever, so any number of
    comparisons against the same U stay mutually consistent.
    """

    __slots__ = ("_src", "_val", "_n")

    def __init__(self, src: RandomSource):
        self._src = src
        self._val = 0
        self._n = 0

    def prefix(self, k: int) -> int:
        """First k bits as an integer: U is in [prefix, prefix + 1) / 2**k."""
        n = self._n
        if n < k:
            need = k - n
            blocks = (need + 63) >> 6
            self._val = (self._val << (blocks * 64)) | self._src.bits(blocks * 64)
            self._n = n = n + blocks * 64
        return self._val >> (n - k)

    def bit(self, i: int) -> int:
        """Bit i (0-based from the binary point) of U."""
        return self.prefix(i + 1) & 1

    @property
    def revealed(self) -> int:
        return self._n
