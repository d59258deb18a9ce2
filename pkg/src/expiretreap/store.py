"""Expirable table on top of the persistent treap.

A query issued at time ``now`` sees exactly the records whose expiration
time is strictly greater than ``now``.  Reads filter by time themselves,
so what a query returns never depends on when the physical sweep last
ran; the sweep only bounds how long stale records occupy memory.

Writers (``put``, ``remove``, sweeps) are serialised by a lock.  Readers
take the current snapshot with a single attribute read and never block.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Any, Callable, Optional

from expiretreap.errors import AlreadyExpired, KeyNotFound
from expiretreap.treap import INFINITY, Record, TreapSnapshot, empty

CADENCE = "cadence"
EAGER = "eager"


class SimulatedClock:
    """Manually driven millisecond clock; never runs backwards."""

    def __init__(self, start: int = 0):
        self._now = start

    def now(self) -> int:
        return self._now

    def set(self, t: int) -> None:
        if t < self._now:
            raise ValueError(f"simulated time cannot go back from {self._now} to {t}")
        self._now = t

    def advance(self, ms: int) -> int:
        self.set(self._now + ms)
        return self._now


class RealTimeClock:
    def now(self) -> int:
        return time.time_ns() // 1_000_000


@dataclass(frozen=True)
class PutResult:
    inserted: bool

    @property
    def key_existed(self) -> bool:
        return not self.inserted


class ExpirableStore:
    """Key/value table whose records vanish at their expiration time.

    ``strategy="cadence"`` sweeps every ``cadence_ms`` of simulated time;
    ``strategy="eager"`` sweeps exactly when the earliest record expires.
    ``on_expire`` receives each expelled :class:`~expiretreap.treap.Record`
    in removal order.
    """

    def __init__(self, clock=None, *, on_expire: Optional[Callable[[Record], Any]] = None,
                 cadence_ms: int = 100, strategy: str = CADENCE,
                 seed: Optional[int] = None, hash_seed: Optional[int] = None):
        if strategy not in (CADENCE, EAGER):
            raise ValueError(f"unknown expiration strategy {strategy!r}")
        if cadence_ms <= 0:
            raise ValueError("cadence_ms must be positive")
        self.clock = clock if clock is not None else SimulatedClock()
        self.on_expire = on_expire
        self.cadence_ms = cadence_ms
        self.strategy = strategy
        self._current = empty(seed=seed, hash_seed=hash_seed)
        self._write_lock = threading.Lock()
        self._next_sweep = self.clock.now() + cadence_ms

    @property
    def current(self) -> TreapSnapshot:
        return self._current

    def now(self) -> int:
        return self.clock.now()

    @property
    def physical_size(self) -> int:
        """Stored records, including expired ones not yet swept."""
        return self._current.count

    # -- writes ----------------------------------------------------------

    def put(self, key, expiration, payload: Any = None) -> PutResult:
        """Insert a record that lives until ``expiration`` (``INFINITY`` for never).

        Raises :class:`~expiretreap.errors.AlreadyExpired` unless the
        expiration lies strictly in the future.  An existing key is left
        untouched and reported through ``PutResult.inserted``.
        """
        now = self.clock.now()
        if expiration != INFINITY and not expiration > now:
            raise AlreadyExpired(f"expiration {expiration} is not after current time {now}")
        stale = None
        with self._write_lock:
            before = self._current
            existing = before.lookup(key)
            if existing is not None and existing.expiration <= now:
                # Logically gone already: expel it now instead of reporting a clash.
                stale = existing
                before = before.remove(key)
            after = before.insert(key, expiration, payload)
            self._current = after
        if stale is not None and self.on_expire is not None:
            self.on_expire(stale)
        return PutResult(after is not before)

    def remove(self, key) -> None:
        """Delete a visible record; expired or absent keys raise ``KeyNotFound``."""
        with self._write_lock:
            rec = self._current.lookup(key)
            if rec is None or rec.expiration <= self.clock.now():
                raise KeyNotFound(key)
            self._current = self._current.remove(key)

    def run_expiration(self) -> int:
        """Physically drop every record expired at the current time."""
        with self._write_lock:
            snap, expelled = self._current.expire(self.clock.now())
            if not expelled:
                return 0
            self._current = snap
        if self.on_expire is not None:
            for rec in expelled:
                self.on_expire(rec)
        return len(expelled)

    def advance(self, ms: int) -> int:
        """Move a simulated clock forward, sweeping as the strategy dictates.

        Returns the number of records expelled on the way.
        """
        if not isinstance(self.clock, SimulatedClock):
            raise TypeError("advance() needs a SimulatedClock")
        target = self.clock.now() + ms
        expelled = 0
        if self.strategy == CADENCE:
            while self._next_sweep <= target:
                self.clock.set(self._next_sweep)
                expelled += self.run_expiration()
                self._next_sweep += self.cadence_ms
        else:
            while True:
                m = self._current.min_expiration()
                if m is None or m > target:
                    break
                self.clock.set(max(m, self.clock.now()))
                expelled += self.run_expiration()
        self.clock.set(target)
        return expelled

    tick = advance

    def start_sweeper(self) -> "threading.Event":
        """Sweep every ``cadence_ms`` of wall time in a daemon thread.

        Meant for a :class:`RealTimeClock`.  Set the returned event to stop.
        """
        stop = threading.Event()

        def loop():
            while not stop.wait(self.cadence_ms / 1000):
                self.run_expiration()

        threading.Thread(target=loop, name="expiretreap-sweeper", daemon=True).start()
        return stop

    # -- reads -----------------------------------------------------------

    def get(self, key, default=None):
        """Payload of ``key`` if it is visible now, else ``default``."""
        rec = self._current.lookup(key)
        if rec is None or rec.expiration <= self.clock.now():
            return default
        return rec.payload

    def __contains__(self, key) -> bool:
        rec = self._current.lookup(key)
        return rec is not None and rec.expiration > self.clock.now()

    def scan(self, lo, hi) -> list[tuple[Any, Any]]:
        """Visible ``(key, payload)`` pairs with ``lo <= key <= hi``, in key order."""
        now = self.clock.now()
        return [(r.key, r.payload) for r in self._current.range(lo, hi) if r.expiration > now]

    def items(self) -> list[tuple[Any, Any]]:
        now = self.clock.now()
        return [(r.key, r.payload) for r in self._current.items() if r.expiration > now]

    def live_count(self) -> int:
        now = self.clock.now()
        return sum(1 for r in self._current.items() if r.expiration > now)
