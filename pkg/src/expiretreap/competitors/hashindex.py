"""Chained hash table with grow and shrink."""

from __future__ import annotations

from typing import Any, Iterable, Iterator

from expiretreap.errors import KeyNotFound

_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


class HashIndex:
    """Separate chaining over a power-of-two bucket array.

    Doubles when the load factor exceeds ``grow_at`` and halves when it
    drops below ``shrink_at`` (never below ``min_buckets``).  Iteration
    order is bucket order, not key order.
    """

    name = "hash"

    def __init__(self, min_buckets: int = 8, grow_at: float = 0.75, shrink_at: float = 0.125):
        if min_buckets & (min_buckets - 1) or min_buckets < 1:
            raise ValueError("min_buckets must be a power of two")
        self.min_buckets = min_buckets
        self.grow_at = grow_at
        self.shrink_at = shrink_at
        self._bits = min_buckets.bit_length() - 1
        self._buckets: list[list] = [[] for _ in range(min_buckets)]
        self._size = 0
        self.resizes = 0

    def __len__(self) -> int:
        return self._size

    @property
    def capacity(self) -> int:
        return len(self._buckets)

    @property
    def load_factor(self) -> float:
        return self._size / len(self._buckets)

    @classmethod
    def from_sorted(cls, records: Iterable) -> "HashIndex":
        t = cls()
        for k, e, v in records:
            t.insert(k, e, v)
        return t

    def _slot(self, key) -> int:
        # Fibonacci hashing: take the top bits of a multiplicative scramble.
        return (((hash(key) * _GOLDEN) & _MASK64) >> (64 - self._bits)) if self._bits else 0

    def _resize(self, bits: int) -> None:
        old = self._buckets
        self._bits = bits
        self._buckets = [[] for _ in range(1 << bits)]
        slot = self._slot
        buckets = self._buckets
        for chain in old:
            for entry in chain:
                buckets[slot(entry[0])].append(entry)
        self.resizes += 1

    def insert(self, key, exp, payload: Any = None) -> bool:
        chain = self._buckets[self._slot(key)]
        for entry in chain:
            if entry[0] == key:
                return False
        chain.append((key, exp, payload))
        self._size += 1
        if self._size > self.grow_at * len(self._buckets):
            self._resize(self._bits + 1)
        return True

    def remove(self, key) -> None:
        chain = self._buckets[self._slot(key)]
        for i, entry in enumerate(chain):
            if entry[0] == key:
                chain[i] = chain[-1]
                chain.pop()
                self._size -= 1
                n = len(self._buckets)
                if n > self.min_buckets and self._size < self.shrink_at * n:
                    self._resize(self._bits - 1)
                return
        raise KeyNotFound(key)

    def find(self, key) -> Any:
        for entry in self._buckets[self._slot(key)]:
            if entry[0] == key:
                return entry[2]
        raise KeyNotFound(key)

    def items(self) -> Iterator[tuple]:
        for chain in self._buckets:
            yield from chain

    def expired_keys(self, now) -> list:
        return [e[0] for chain in self._buckets for e in chain if e[1] <= now]

    def check(self) -> None:
        slot = self._slot
        n = 0
        for i, chain in enumerate(self._buckets):
            for entry in chain:
                assert slot(entry[0]) == i, "entry in wrong bucket"
                n += 1
        assert n == self._size
        assert self._size <= self.grow_at * len(self._buckets)
