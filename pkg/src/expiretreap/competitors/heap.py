"""Array-embedded binary min-heap of ``(expiration, key)`` with lazy deletion.

Deleting from the middle of a binary heap needs a position index that
every swap must maintain.  Instead, :meth:`ExpiryHeap.discard` only marks
the key dead; dead entries are skipped when they reach the top, and the
array is compacted once more than half of it is dead.

The sift loops are written out rather than delegated to :mod:`heapq` so
that the supporting heap runs at the same interpreter level as every
other structure in the benchmark.
"""

from __future__ import annotations

import math
from typing import Optional


class ExpiryHeap:
    def __init__(self, max_dead_ratio: float = 0.5):
        self._a: list[tuple] = []  # (expiration, seq, key)
        self._live: dict = {}  # key -> seq of its current entry
        self._seq = 0
        self.tombstones = 0
        self.max_dead_ratio = max_dead_ratio
        self.rebuilds = 0

    def __len__(self) -> int:
        """Live entries."""
        return len(self._live)

    @property
    def physical_size(self) -> int:
        """Array slots in use, dead ones included."""
        return len(self._a)

    def __contains__(self, key) -> bool:
        return key in self._live

    @classmethod
    def from_records(cls, records) -> "ExpiryHeap":
        h = cls()
        a = h._a
        for key, exp in records:
            if exp == math.inf:
                continue
            h._seq += 1
            a.append((exp, h._seq, key))
            h._live[key] = h._seq
        h._heapify()
        return h

    def _heapify(self) -> None:
        for i in reversed(range(len(self._a) // 2)):
            self._sift_down(i)

    def _sift_up(self, i: int) -> None:
        a = self._a
        item = a[i]
        while i > 0:
            parent = (i - 1) >> 1
            p = a[parent]
            if item < p:
                a[i] = p
                i = parent
            else:
                break
        a[i] = item

    def _sift_down(self, i: int) -> None:
        a = self._a
        n = len(a)
        item = a[i]
        child = 2 * i + 1
        while child < n:
            right = child + 1
            if right < n and a[right] < a[child]:
                child = right
            if a[child] < item:
                a[i] = a[child]
                i = child
                child = 2 * i + 1
            else:
                break
        a[i] = item

    def push(self, key, exp) -> None:
        """Track ``key`` expiring at finite time ``exp``."""
        if exp == math.inf:
            raise ValueError("supporting heaps only hold finite expiration times")
        if key in self._live:
            self._mark_dead(key)
        self._seq += 1
        self._live[key] = self._seq
        self._a.append((exp, self._seq, key))
        self._sift_up(len(self._a) - 1)

    def _mark_dead(self, key) -> None:
        del self._live[key]
        self.tombstones += 1

    def discard(self, key) -> bool:
        if key not in self._live:
            return False
        self._mark_dead(key)
        if self.tombstones > self.max_dead_ratio * len(self._a):
            self._compact()
        return True

    def _compact(self) -> None:
        live = self._live
        self._a = [e for e in self._a if live.get(e[2]) == e[1]]
        self.tombstones = 0
        self._heapify()
        self.rebuilds += 1

    def _pop_top(self) -> tuple:
        a = self._a
        last = a.pop()
        if not a:
            return last
        top = a[0]
        a[0] = last
        self._sift_down(0)
        return top

    def _skip_dead(self) -> None:
        a = self._a
        live = self._live
        while a and live.get(a[0][2]) != a[0][1]:
            self._pop_top()
            self.tombstones -= 1

    def peek(self) -> Optional[tuple]:
        """``(expiration, key)`` of the earliest live entry, or ``None``."""
        self._skip_dead()
        if not self._a:
            return None
        exp, _, key = self._a[0]
        return exp, key

    def pop_expired(self, now) -> list:
        """Remove and return keys of live entries with ``expiration <= now``, earliest first."""
        out = []
        a = self._a
        live = self._live
        while a and a[0][0] <= now:
            exp, seq, key = self._pop_top()
            if live.get(key) == seq:
                del live[key]
                out.append(key)
            else:
                self.tombstones -= 1
        return out

    def check(self) -> None:
        a = self._a
        for i in range(1, len(a)):
            assert not a[i] < a[(i - 1) >> 1], "heap order"
        live_entries = sum(1 for e in a if self._live.get(e[2]) == e[1])
        assert live_entries == len(self._live)
        assert len(a) - live_entries == self.tombstones
