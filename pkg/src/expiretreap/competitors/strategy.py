"""Expiration strategies for the non-treap baselines.

``PeriodicCleansing`` scans the whole index at interval boundaries and
deletes whatever has expired.  ``EagerHeap`` keeps a supporting
:class:`~expiretreap.competitors.heap.ExpiryHeap` and deletes records as
soon as they are due.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional, Union

from expiretreap.competitors.heap import ExpiryHeap


@dataclass
class PeriodicCleansing:
    interval: int
    next_boundary: Optional[int] = None

    def __post_init__(self):
        if self.interval <= 0:
            raise ValueError("cleansing interval must be positive")
        if self.next_boundary is None:
            self.next_boundary = self.interval


@dataclass
class EagerHeap:
    pass


Strategy = Union[PeriodicCleansing, EagerHeap]


def strat_step(index, heap: Optional[ExpiryHeap], strategy: Strategy, now) -> int:
    """Apply one expiration step at time ``now``; returns the number of records removed."""
    if isinstance(strategy, EagerHeap):
        if heap is None:
            raise ValueError("eager expiration needs a supporting heap")
        keys = heap.pop_expired(now)
        for k in keys:
            index.remove(k)
        return len(keys)
    if heap is not None:
        raise ValueError("periodic cleansing runs without a supporting heap")
    if now < strategy.next_boundary:
        return 0
    keys = index.expired_keys(now)
    for k in keys:
        index.remove(k)
    strategy.next_boundary = (now // strategy.interval + 1) * strategy.interval
    return len(keys)


class ExpiringIndex:
    """An index bundled with its expiration strategy (and heap, if eager)."""

    def __init__(self, index, strategy: Strategy, heap: Optional[ExpiryHeap] = None):
        if isinstance(strategy, EagerHeap) and heap is None:
            heap = ExpiryHeap()
        self.index = index
        self.strategy = strategy
        self.heap = heap
        self.name = index.name + ("+heap" if heap is not None else "")

    @classmethod
    def from_sorted(cls, index_cls, records, strategy: Strategy) -> "ExpiringIndex":
        recs = list(records)
        heap = ExpiryHeap.from_records((k, e) for k, e, _ in recs) if isinstance(strategy, EagerHeap) else None
        return cls(index_cls.from_sorted(recs), strategy, heap)

    def __len__(self) -> int:
        return len(self.index)

    def insert(self, key, exp, payload: Any = None) -> bool:
        if not self.index.insert(key, exp, payload):
            return False
        if self.heap is not None and exp != math.inf:
            self.heap.push(key, exp)
        return True

    def remove(self, key) -> None:
        self.index.remove(key)
        if self.heap is not None:
            self.heap.discard(key)

    def find(self, key) -> Any:
        return self.index.find(key)

    def items(self):
        return self.index.items()

    def step(self, now) -> int:
        return strat_step(self.index, self.heap, self.strategy, now)

    @property
    def heap_entries(self) -> int:
        return self.heap.physical_size if self.heap is not None else 0

    @property
    def tombstones(self) -> int:
        return self.heap.tombstones if self.heap is not None else 0

    @property
    def memory_proxy(self) -> int:
        """Index entries plus supporting-heap slots (dead ones included)."""
        return len(self.index) + self.heap_entries
