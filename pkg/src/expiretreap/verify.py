"""Randomised oracle-equivalence checks for the treap.

Each run replays one seeded stream of mixed operations against both a
:class:`~expiretreap.treap.TreapSnapshot` chain and a plain ``dict``
oracle, comparing every observable result.  The same runs also check the
structural invariants, persistence of an old snapshot, and eager
expiration.  ``expiretreap verify`` and the acceptance tests drive this.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from expiretreap.errors import KeyNotFound
from expiretreap.treap import INFINITY, TreapSnapshot, empty, validate

# Cumulative thresholds on a uniform draw.
_INSERT, _REMOVE, _FIND, _RANGE = 0.50, 0.62, 0.90, 0.93  # rest: expire


class OracleMismatch(AssertionError):
    pass


@dataclass
class RunStats:
    seed: int
    ops: int = 0
    inserts: int = 0
    duplicate_inserts: int = 0
    removes: int = 0
    missing_removes: int = 0
    finds: int = 0
    ranges: int = 0
    expires: int = 0
    expelled: int = 0
    invariant_checks: int = 0
    persistence_checked: bool = False
    peak_size: int = 0


@dataclass
class SuiteResult:
    runs: list[RunStats] = field(default_factory=list)

    @property
    def total_ops(self) -> int:
        return sum(r.ops for r in self.runs)

    @property
    def invariant_checks(self) -> int:
        return sum(r.invariant_checks for r in self.runs)


def _fail(seed: int, op: int, what: str):
    raise OracleMismatch(f"seed {seed}, op {op}: {what}")


def run_sequence(seed: int, n_ops: int = 10_000, *, key_space: int = 512,
                 check_every: int = 100, snapshot_at: int | None = None,
                 infinite_share: float = 0.02) -> RunStats:
    """Replay ``n_ops`` random operations and compare against a dict oracle.

    Raises :class:`OracleMismatch` (or
    :class:`~expiretreap.errors.InvariantViolation`) on the first
    disagreement.  ``snapshot_at`` defaults to the midpoint of the run; the
    snapshot taken there must traverse identically at the end.
    """
    if snapshot_at is None:
        snapshot_at = n_ops // 2
    rng = random.Random(seed)
    rand = rng.random

    # int(rand() * n) stands in for randrange(n): several times faster, and
    # the slight bias is irrelevant here.
    stats = RunStats(seed)

    s: TreapSnapshot = empty(seed)
    oracle: dict[int, tuple] = {}
    now = 0
    kept = None
    kept_items = None

    for op in range(1, n_ops + 1):
        r = rand()
        if r < _INSERT:
            key = int(rand() * key_space)
            exp = INFINITY if rand() < infinite_share else now + 1 + int(rand() * 2000)
            payload = int(rand() * (1 << 32))
            s = s.insert(key, exp, payload)
            if key in oracle:
                stats.duplicate_inserts += 1
            else:
                oracle[key] = (exp, payload)
            stats.inserts += 1
        elif r < _REMOVE:
            key = int(rand() * key_space)
            try:
                s = s.remove(key)
                removed = True
            except KeyNotFound:
                removed = False
            if removed != (key in oracle):
                _fail(seed, op, f"remove({key}) disagreed on presence")
            if removed:
                del oracle[key]
            else:
                stats.missing_removes += 1
            stats.removes += 1
        elif r < _FIND:
            key = int(rand() * key_space)
            try:
                got = s.find(key)
            except KeyNotFound:
                if key in oracle:
                    _fail(seed, op, f"find({key}) missed a stored key")
            else:
                want = oracle.get(key)
                if want is None or want[1] != got:
                    _fail(seed, op, f"find({key}) returned {got!r}, oracle has {want!r}")
            stats.finds += 1
        elif r < _RANGE:
            lo = int(rand() * key_space)
            hi = min(key_space, lo + int(rand() * (key_space // 4)))
            got = [(rec.key, rec.expiration, rec.payload) for rec in s.range(lo, hi)]
            want = sorted((k, e, v) for k, (e, v) in oracle.items() if lo <= k <= hi)
            if got != want:
                _fail(seed, op, f"range({lo}, {hi}) differs from oracle")
            stats.ranges += 1
        else:
            now += int(rand() * 50)
            s, expelled = s.expire(now)
            gone = {k: ev for k, ev in oracle.items() if ev[0] <= now}
            if len(expelled) != len(gone):
                _fail(seed, op, f"expire({now}) expelled {len(expelled)}, oracle {len(gone)}")
            last = -1
            for rec in expelled:
                want = gone.get(rec.key)
                if want is None or want != (rec.expiration, rec.payload):
                    _fail(seed, op, f"expire({now}) expelled unexpected {rec!r}")
                if rec.expiration == INFINITY or rec.expiration < last:
                    _fail(seed, op, f"expire({now}) expelled {rec!r} out of order")
                last = rec.expiration
                del oracle[rec.key]
            m = s.min_expiration()
            if m is not None and not m > now:
                _fail(seed, op, f"after expire({now}) a record expiring at {m} remains")
            stats.expires += 1
            stats.expelled += len(expelled)

        if s.count != len(oracle):
            _fail(seed, op, f"count {s.count} != oracle size {len(oracle)}")
        if s.count > stats.peak_size:
            stats.peak_size = s.count
        if check_every and op % check_every == 0:
            validate(s)
            stats.invariant_checks += 1
        if op == snapshot_at:
            kept = s
            kept_items = s.traverse()

    want = sorted((k, e, v) for k, (e, v) in oracle.items())
    if [tuple(rec) for rec in s.traverse()] != want:
        _fail(seed, n_ops, "final contents differ from oracle")
    if kept is not None:
        if kept.traverse() != kept_items:
            _fail(seed, n_ops, f"snapshot taken at op {snapshot_at} changed")
        stats.persistence_checked = True
    stats.ops = n_ops
    return stats


def run_suite(runs: int, n_ops: int = 10_000, seed: int = 0, **kwargs) -> SuiteResult:
    """``runs`` independent sequences with seeds derived from ``seed``."""
    result = SuiteResult()
    for i in range(runs):
        result.runs.append(run_sequence(seed * 1_000_003 + i, n_ops, **kwargs))
    return result
