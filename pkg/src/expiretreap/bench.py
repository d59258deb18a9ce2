"""Benchmark harness: replay traces against treaps and the baselines.

A scenario bulk-loads a structure to its target size with records whose
remaining lifetimes follow the steady state of the lifetime distribution,
then replays a B-Model trace under a simulated clock.  Each trace bucket
first runs the structure's expiration step and then inserts the bucket's
arrivals.  Work is aggregated into rows of ``ops_per_aggregation``
operations (inserts, expirations and explicit removes); only rows are
timed, never single operations.

Timed sections run with the cyclic garbage collector paused, as
:mod:`timeit` does.  Reference counting still frees every dropped node,
so allocation cost stays in the measurement.
"""

from __future__ import annotations

import bisect
import csv
import gc
import math
import os
import random
import statistics
import threading
import time
from collections import deque
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Any, Iterator, Optional

from expiretreap.competitors import (
    AvlTree,
    EagerHeap,
    ExpiringIndex,
    HashIndex,
    PeriodicCleansing,
    RedBlackTree,
)
from expiretreap.errors import ConfigError, UndefinedRoE
from expiretreap.treap import INFINITY, TreapSnapshot, build, empty
from expiretreap.workload import BModelParams, Lifetime, WorkloadTrace, generate, parse_lifetime

try:
    import resource
except ImportError:  # not on every platform
    resource = None

# Scenario clocks tick in nanoseconds.  Traces are bucketed in milliseconds,
# and stamping every arrival of a bucket with the same time would hand the
# treap long runs of equal expiration times; percolation resolves those
# ties always to the left, which slowly unbalances the tree.
TICKS_PER_MS = 1_000_000

ROW_FIELDS = ("interval_index", "wall_ms", "inserts", "expirations", "removes",
              "live_size", "heap_entries", "tombstones")

# Canonical name -> (index class or None for the treap, eager heap?, hashed keys?)
STRUCTURES = {
    "treap": (None, True, False),
    "treap-hashed": (None, True, True),
    "avl": (AvlTree, False, False),
    "avl+heap": (AvlTree, True, False),
    "redblack": (RedBlackTree, False, False),
    "redblack+heap": (RedBlackTree, True, False),
    "hash": (HashIndex, False, False),
    "hash+heap": (HashIndex, True, False),
}

_ALIASES = {
    "treaphashed": "treap-hashed", "treap_hashed": "treap-hashed",
    "avlheap": "avl+heap", "avl_heap": "avl+heap",
    "rb": "redblack", "red-black": "redblack",
    "redblackheap": "redblack+heap", "redblack_heap": "redblack+heap", "rb+heap": "redblack+heap",
    "hashheap": "hash+heap", "hash_heap": "hash+heap",
}

MEASUREMENTS = ("maintenance", "lookup", "traversal")


def structure_name(text: str) -> str:
    """Canonical structure name; accepts ``TreapHashed``, ``AvlHeap`` style spellings."""
    s = text.strip().lower()
    s = _ALIASES.get(s, s)
    if s not in STRUCTURES:
        raise ConfigError(f"unknown structure {text!r}; choose from {', '.join(STRUCTURES)}")
    return s


def rate_of_expiration(expirations: int, live: int) -> Fraction:
    """``expirations / (live + expirations)`` as an exact fraction."""
    if expirations < 0 or live < 0:
        raise ValueError("counts must be non-negative")
    if expirations + live == 0:
        raise UndefinedRoE("rate of expiration needs at least one record")
    return Fraction(expirations, live + expirations)


# -- structure adapters --------------------------------------------------------

class TreapIndex:
    """Mutable wrapper around treap snapshots with the baseline interface."""

    heap_entries = 0
    tombstones = 0

    def __init__(self, snapshot: TreapSnapshot, name: str = "treap"):
        self.snapshot = snapshot
        self.name = name

    def __len__(self) -> int:
        return self.snapshot.count

    def insert(self, key, exp, payload: Any = None) -> bool:
        before = self.snapshot
        self.snapshot = before.insert(key, exp, payload)
        return self.snapshot is not before

    def remove(self, key) -> None:
        self.snapshot = self.snapshot.remove(key)

    def find(self, key) -> Any:
        return self.snapshot.find(key)

    def items(self) -> Iterator:
        return self.snapshot.items()

    def step(self, now) -> int:
        self.snapshot, n = self.snapshot.expire_count(now)
        return n

    @property
    def memory_proxy(self) -> int:
        return self.snapshot.count


def make_structure(name: str, records=(), *, cleansing_ms: int = 1000, seed: int = 0):
    """Bulk-load ``(key, expiration, payload)`` records into a fresh structure."""
    name = structure_name(name)
    index_cls, eager, hashed = STRUCTURES[name]
    if index_cls is None:
        hash_seed = seed if hashed else None
        return TreapIndex(build(records, seed=seed, hash_seed=hash_seed), name)
    strategy = EagerHeap() if eager else PeriodicCleansing(cleansing_ms)
    return ExpiringIndex.from_sorted(index_cls, sorted(records, key=lambda r: r[0]), strategy)


# -- configuration ---------------------------------------------------------------

@dataclass
class ScenarioConfig:
    """One benchmark scenario.

    The trace is ``BModel(b, l, n)`` with ``2**l`` buckets of ``bucket_ms``.
    Periodic-cleansing baselines scan every ``cleansing_ms``; when unset it
    is ``roe`` times the mean lifetime (the share of a steady-state
    database that decays within one cleansing interval).
    """

    structure: str = "treap"
    b: float = 0.5
    l: int = 10
    n: int = 10_000
    lifetime: str = "fixed:1000"
    bucket_ms: int = 1
    target_db_size: int = 10_000
    ops_per_aggregation: int = 80_000
    measurement: str = "maintenance"
    roe: float = 1.0
    cleansing_ms: Optional[int] = None
    remove_fraction: float = 0.0
    n_lookups: int = 100_000
    seed: int = 0

    def __post_init__(self):
        self.structure = structure_name(self.structure)
        if self.measurement not in MEASUREMENTS:
            raise ConfigError(f"measurement must be one of {', '.join(MEASUREMENTS)}")
        if self.ops_per_aggregation <= 0:
            raise ConfigError("ops_per_aggregation must be positive")
        if self.bucket_ms <= 0:
            raise ConfigError("bucket_ms must be positive")
        if self.target_db_size < 0 or self.n_lookups < 0:
            raise ConfigError("sizes must be non-negative")
        if not 0.0 <= self.remove_fraction <= 1.0:
            raise ConfigError("remove_fraction must lie in [0, 1]")
        if not 0.0 < self.roe <= 1.0:
            raise ConfigError("roe must lie in (0, 1]")
        try:
            self.ltd = parse_lifetime(self.lifetime)
            self.params = BModelParams(self.b, self.l, self.n, self.seed)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if self.cleansing_ms is None:
            if math.isinf(self.ltd.mean):
                self.cleansing_ms = self.bucket_ms * 2 ** self.l
            else:
                self.cleansing_ms = max(1, round(self.roe * self.ltd.mean))
        if self.cleansing_ms <= 0:
            raise ConfigError("cleansing_ms must be positive")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_INT_FIELDS = {"l", "n", "bucket_ms", "target_db_size", "ops_per_aggregation", "n_lookups", "seed", "cleansing_ms"}
_FLOAT_FIELDS = {"b", "roe", "remove_fraction"}


def load_config(path: str) -> ScenarioConfig:
    """Read ``key = value`` lines (``#`` starts a comment) into a config."""
    known = {f.name for f in fields(ScenarioConfig)}
    values: dict[str, Any] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown or malformed entry {line!r}")
        try:
            if key in _INT_FIELDS:
                values[key] = int(value)
            elif key in _FLOAT_FIELDS:
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    try:
        return ScenarioConfig(**values)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from None


# -- reports ---------------------------------------------------------------------

@dataclass
class Row:
    interval_index: int
    wall_ms: float
    inserts: int
    expirations: int
    removes: int
    live_size: int
    heap_entries: int
    tombstones: int
    insert_ms: float = 0.0
    expire_ms: float = 0.0
    memory_proxy: int = 0

    @property
    def ops(self) -> int:
        return self.inserts + self.expirations + self.removes

    def roe(self) -> Fraction:
        return rate_of_expiration(self.expirations, self.live_size)


@dataclass
class BenchReport:
    structure: str
    rows: list[Row] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)
    start_live: int = 0

    @property
    def maintenance_ms(self) -> float:
        return sum(r.wall_ms for r in self.rows)

    @property
    def total_ops(self) -> int:
        return sum(r.ops for r in self.rows)

    def roe_series(self) -> list[Fraction]:
        return [r.roe() for r in self.rows if r.expirations + r.live_size > 0]

    def peak_memory_proxy(self) -> int:
        return max((r.memory_proxy for r in self.rows), default=0)

    def pdf(self, bins: int = 50, attr: str = "wall_ms") -> list[tuple[float, float, float]]:
        return histogram([getattr(r, attr) for r in self.rows], bins)


def histogram(values: list[float], bins: int = 50) -> list[tuple[float, float, float]]:
    """``(lo, hi, density)`` over ``bins`` equal bins spanning min..max.

    Densities integrate to one.  If every value is equal, one bin of zero
    width holds all the mass (density reported as 1).
    """
    if bins <= 0:
        raise ValueError("bins must be positive")
    if not values:
        return []
    lo, hi = min(values), max(values)
    if lo == hi:
        return [(lo, hi, 1.0)]
    width = (hi - lo) / bins
    counts = [0] * bins
    for v in values:
        counts[min(int((v - lo) / width), bins - 1)] += 1
    n = len(values)
    return [(lo + i * width, lo + (i + 1) * width, c / (n * width)) for i, c in enumerate(counts)]


def emit_csv(report: BenchReport, path: str) -> None:
    """Write the per-interval rows with the fixed column order."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ROW_FIELDS)
            for r in report.rows:
                w.writerow([r.interval_index, f"{r.wall_ms:.3f}", r.inserts, r.expirations, r.removes,
                            r.live_size, r.heap_entries, r.tombstones])
    except OSError as e:
        raise OSError(e.errno, f"cannot write {path}: {e.strerror}") from None


def emit_summary_csv(report: BenchReport, path: str) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("metric", "value"))
            for k, v in report.summary.items():
                w.writerow((k, _fmt(v)))
    except OSError as e:
        raise OSError(e.errno, f"cannot write {path}: {e.strerror}") from None


def emit_pdf_csv(report: BenchReport, path: str, bins: int = 50) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("series", "bin_lo_ms", "bin_hi_ms", "density"))
            for series in ("wall_ms", "insert_ms", "expire_ms"):
                for lo, hi, d in report.pdf(bins, series):
                    w.writerow((series, f"{lo:.4f}", f"{hi:.4f}", f"{d:.6g}"))
    except OSError as e:
        raise OSError(e.errno, f"cannot write {path}: {e.strerror}") from None


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, Fraction):
        return f"{float(v):.6g}"
    return str(v)


# -- maintenance scenario --------------------------------------------------------

def _key_map(total: int, seed: int) -> list[int]:
    perm = list(range(total))
    random.Random(seed ^ 0x5EED).shuffle(perm)
    return perm


def bootstrap_records(cfg: ScenarioConfig, key_of, offset: int) -> list[tuple[int, float, None]]:
    """Steady-state database at tick 0: residual lifetimes, key ids from ``offset`` on.

    A residual of ``r`` ms becomes a uniform tick in ``((r - 1) ms, r ms]``.
    """
    rng = random.Random(cfg.seed * 7919 + 1)
    residual = cfg.ltd.residual
    randint = rng.randint
    out = []
    for j in range(cfg.target_db_size):
        r = residual(rng)
        exp = r if r == INFINITY else (r - 1) * TICKS_PER_MS + randint(1, TICKS_PER_MS)
        out.append((key_of(offset + j), exp, None))
    return out


@dataclass
class _Counters:
    inserts: int = 0
    expirations: int = 0
    removes: int = 0
    insert_s: float = 0.0
    expire_s: float = 0.0


def run_scenario(cfg: ScenarioConfig, trace: Optional[WorkloadTrace] = None) -> BenchReport:
    """Bootstrap, replay the trace and aggregate rows.

    The operation sequence depends only on ``cfg`` (and ``trace``), so two
    runs produce identical counts; only the timings differ.
    """
    if cfg.measurement == "lookup":
        res = lookup_bench(cfg.structure, cfg.target_db_size, cfg.n_lookups, seed=cfg.seed)
        return BenchReport(cfg.structure, summary={"structure": cfg.structure, "db_size": cfg.target_db_size,
                                                   "lookups": res.lookups, "seconds": res.seconds,
                                                   "ops_per_second": res.ops_per_second})
    if cfg.measurement == "traversal":
        res = traversal_bench(cfg.structure, cfg.target_db_size, seed=cfg.seed)
        return BenchReport(cfg.structure, summary={"structure": cfg.structure, "db_size": cfg.target_db_size,
                                                   "visited": res.visited, "seconds": res.seconds})

    if trace is None:
        trace = generate(cfg.params, cfg.ltd, cfg.bucket_ms)
    perm = _key_map(trace.total + cfg.target_db_size, cfg.seed)
    key_of = perm.__getitem__
    boot = bootstrap_records(cfg, key_of, trace.total)
    s = make_structure(cfg.structure, boot, cleansing_ms=cfg.cleansing_ms * TICKS_PER_MS, seed=cfg.seed)
    del boot

    report = BenchReport(cfg.structure, start_live=len(s))
    if trace.total == 0:
        report.summary = _summarise(cfg, report)
        return report

    rm_rng = random.Random(cfg.seed * 104_729 + 3)
    pending: deque = deque()  # (key, expiration) of arrivals, oldest first
    threshold = cfg.ops_per_aggregation
    rows = report.rows
    c = _Counters()
    perf = time.perf_counter
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        row_start = perf()
        row_ops = 0

        def close_row() -> None:
            nonlocal row_start, row_ops, c
            now_t = perf()
            rows.append(Row(len(rows), (now_t - row_start) * 1000.0, c.inserts, c.expirations, c.removes,
                            len(s), s.heap_entries, s.tombstones, c.insert_s * 1000.0, c.expire_s * 1000.0,
                            s.memory_proxy))
            c = _Counters()
            row_ops = 0
            row_start = perf()

        insert = s.insert
        remove = s.remove
        step = s.step
        remove_fraction = cfg.remove_fraction
        span = trace.bucket_ms * TICKS_PER_MS
        for bucket, recs in enumerate(trace.records):
            now = bucket * span
            t0 = perf()
            expired = step(now)
            t1 = perf()
            c.expire_s += t1 - t0
            c.expirations += expired
            row_ops += expired
            if row_ops >= threshold:
                close_row()
            if not recs:
                continue
            count = len(recs)
            t0 = perf()
            for j, (key, life) in enumerate(recs):
                k = key_of(key)
                # Arrivals are spread evenly over the bucket.
                exp = now + (j * span) // count + life * TICKS_PER_MS
                insert(k, exp)
                c.inserts += 1
                row_ops += 1
                if remove_fraction and rm_rng.random() < remove_fraction:
                    pending.append((k, exp))
                    # Drop the oldest tracked arrival that is still logically alive,
                    # so every structure sees the same explicit removes.
                    while pending:
                        rk, rexp = pending.popleft()
                        if rexp > now:
                            remove(rk)
                            c.removes += 1
                            row_ops += 1
                            break
                if row_ops >= threshold:
                    c.insert_s += perf() - t0
                    close_row()
                    t0 = perf()
            c.insert_s += perf() - t0
        if row_ops:
            close_row()
    finally:
        if was_enabled:
            gc.enable()
    report.summary = _summarise(cfg, report)
    return report


def _summarise(cfg: ScenarioConfig, report: BenchReport) -> dict[str, Any]:
    rows = report.rows
    out: dict[str, Any] = {
        "structure": cfg.structure,
        "rows": len(rows),
        "start_live": report.start_live,
        "inserts": sum(r.inserts for r in rows),
        "expirations": sum(r.expirations for r in rows),
        "removes": sum(r.removes for r in rows),
        "maintenance_ms": report.maintenance_ms,
        "insert_ms": sum(r.insert_ms for r in rows),
        "expire_ms": sum(r.expire_ms for r in rows),
        "cleansing_ms": cfg.cleansing_ms,
        "roe_target": cfg.roe,
    }
    if rows:
        tput = [r.ops / (r.wall_ms / 1000.0) for r in rows if r.wall_ms > 0]
        q = _quantiles(tput)
        out.update(
            throughput_mean=statistics.fmean(tput) if tput else 0.0,
            throughput_p05=q[0], throughput_p50=q[1], throughput_p95=q[2],
            live_mean=statistics.fmean(r.live_size for r in rows),
            live_peak=max(r.live_size for r in rows),
            peak_memory_proxy=report.peak_memory_proxy(),
        )
        series = report.roe_series()
        if series:
            out["roe_row_mean"] = float(sum(series) / len(series))
    rss = max_rss_kb()
    if rss is not None:
        out["max_rss_kb"] = rss
    return out


def _quantiles(xs: list[float]) -> tuple[float, float, float]:
    if not xs:
        return (0.0, 0.0, 0.0)
    if len(xs) == 1:
        return (xs[0], xs[0], xs[0])
    cuts = statistics.quantiles(xs, n=20, method="inclusive")
    return cuts[0], statistics.median(xs), cuts[-1]


def max_rss_kb() -> Optional[int]:
    if resource is None:
        return None
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss


# -- lookups and traversal ------------------------------------------------------

@dataclass(frozen=True)
class LookupResult:
    structure: str
    db_size: int
    lookups: int
    seconds: float
    keys_digest: int

    @property
    def ops_per_second(self) -> float:
        return self.lookups / self.seconds if self.seconds > 0 else 0.0

    @property
    def us_per_lookup(self) -> float:
        return self.seconds * 1e6 / self.lookups if self.lookups else 0.0


def populate(name: str, db_size: int, seed: int = 0):
    """Structure holding ``db_size`` random keys; returns it with its key list."""
    rng = random.Random(seed)
    keys = rng.sample(range(4 * db_size + 1), db_size) if db_size else []
    recs = [(k, rng.randint(1, 10**9), k) for k in keys]
    return make_structure(name, recs, seed=seed, cleansing_ms=10**9), keys


def lookup_bench(structure, db_size: int, n_lookups: int = 100_000, seed: int = 0,
                 repeat: int = 1) -> LookupResult:
    """Time ``n_lookups`` uniformly random present-key lookups (best of ``repeat``).

    ``structure`` is a structure name, or an already populated structure
    together with ``db_size`` equal to its size (keys are then read back
    from it).
    """
    if isinstance(structure, str):
        name = structure_name(structure)
        s, keys = populate(name, db_size, seed)
    else:
        s = structure
        name = getattr(s, "name", type(s).__name__)
        keys = [r[0] for r in s.items()]
        if len(keys) != db_size:
            raise ValueError(f"structure holds {len(keys)} records, not {db_size}")
    if n_lookups and not keys:
        raise ValueError("cannot look up keys in an empty structure")
    rng = random.Random(seed + 1)
    probe = [keys[int(rng.random() * len(keys))] for _ in range(n_lookups)]
    find = s.find
    best = math.inf
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(max(1, repeat)):
            t0 = time.perf_counter()
            for k in probe:
                find(k)
            best = min(best, time.perf_counter() - t0)
    finally:
        if was_enabled:
            gc.enable()
    if not n_lookups:
        best = 0.0
    return LookupResult(name, db_size, n_lookups, best, hash(tuple(probe[:64])))


@dataclass(frozen=True)
class TraversalResult:
    structure: str
    db_size: int
    visited: int
    seconds: float


def traversal_bench(structure, db_size: int, seed: int = 0, repeat: int = 1) -> TraversalResult:
    """Time one full in-order traversal that consumes every record (best of ``repeat``)."""
    if isinstance(structure, str):
        name = structure_name(structure)
        s, _ = populate(name, db_size, seed)
    else:
        s = structure
        name = getattr(s, "name", type(s).__name__)
    best = math.inf
    visited = 0
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(max(1, repeat)):
            t0 = time.perf_counter()
            visited = 0
            for _rec in s.items():
                visited += 1
            best = min(best, time.perf_counter() - t0)
    finally:
        if was_enabled:
            gc.enable()
    return TraversalResult(name, db_size, visited, best)


def lookup_scaling(structure: str, sizes, n_lookups: int = 100_000, repeat: int = 1) -> list[LookupResult]:
    """:func:`lookup_bench` for each size in turn, each on a freshly populated structure."""
    return [lookup_bench(structure, n, n_lookups, seed=n, repeat=repeat) for n in sizes]


def traversal_scaling(structure: str, sizes, repeat: int = 1) -> list[TraversalResult]:
    """Traversal times for every size, all populated up front and timed round-robin.

    Interleaving means a slow phase of the host hits every size alike
    instead of inflating whichever size happened to run during it.
    """
    structures = [populate(structure_name(structure), n, seed=n)[0] for n in sizes]
    best: list[TraversalResult] = [None] * len(sizes)  # type: ignore[list-item]
    for _ in range(max(1, repeat)):
        for i, (n, s) in enumerate(zip(sizes, structures)):
            res = traversal_bench(s, n)
            if best[i] is None or res.seconds < best[i].seconds:
                best[i] = res
    return best


# -- readers against a live writer ----------------------------------------------------

@dataclass
class StressResult:
    lookups: int
    updates: int
    torn_reads: int
    versions: int
    seconds: float
    first_error: Optional[str] = None


def reader_stress(readers: int = 8, total_lookups: int = 1_000_000, updates: int = 100_000,
                  key_space: int = 10_000, seed: int = 0) -> StressResult:
    """Readers look up keys in published snapshots while one writer updates.

    The writer upserts (or occasionally removes) a key, records the write in
    that key's history and only then publishes ``(version, snapshot)`` as a
    single reference.  A reader resolves what its snapshot must contain by
    bisecting the history at its version; any disagreement is a torn read.
    """
    if readers <= 0:
        raise ValueError("need at least one reader")
    wrng = random.Random(seed)
    snap = empty(seed=seed)
    history: list[list[int]] = [[] for _ in range(key_space)]   # versions that wrote the key
    written: list[list[Optional[int]]] = [[] for _ in range(key_space)]  # payload per write (None = removed)
    published = (0, snap)
    lock = threading.Lock()
    torn = [0]
    errors: list[str] = []
    start = threading.Barrier(readers + 1)

    def reader(idx: int, count: int) -> None:
        rng = random.Random(seed * 1000 + idx + 1)
        bad = 0
        start.wait()
        for _ in range(count):
            version, snapshot = published
            k = int(rng.random() * key_space)
            rec = snapshot.lookup(k)
            hist = history[k]
            i = bisect.bisect_right(hist, version)
            want = written[k][i - 1] if i else None
            got = rec.payload if rec is not None else None
            if got != want:
                bad += 1
                if not errors:
                    errors.append(f"key {k} at version {version}: got {got}, expected {want}")
        with lock:
            torn[0] += bad

    share, extra = divmod(total_lookups, readers)
    threads = [threading.Thread(target=reader, args=(i, share + (i < extra)), daemon=True) for i in range(readers)]
    for t in threads:
        t.start()
    t0 = time.perf_counter()
    start.wait()
    for v in range(1, updates + 1):
        k = int(wrng.random() * key_space)
        if wrng.random() < 0.1:
            snap = snap.discard(k)
            payload = None
        else:
            snap = snap.upsert(k, INFINITY, v)
            payload = v
        history[k].append(v)
        written[k].append(payload)
        published = (v, snap)
    for t in threads:
        t.join()
    return StressResult(total_lookups, updates, torn[0], updates + 1, time.perf_counter() - t0,
                        errors[0] if errors else None)


def write_reports(report: BenchReport, out_dir: str, stem: str = "") -> list[str]:
    """Rows, summary and PDF CSVs into ``out_dir``; returns the paths written."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise OSError(e.errno, f"cannot create {out_dir}: {e.strerror}") from None
    prefix = f"{stem}-" if stem else ""
    paths = [os.path.join(out_dir, f"{prefix}{name}.csv") for name in ("rows", "summary", "pdf")]
    emit_csv(report, paths[0])
    emit_summary_csv(report, paths[1])
    emit_pdf_csv(report, paths[2])
    return paths
