"""B-Model traffic generation with a lifetime distribution.

``BModel(b, l, N)`` splits a total volume of ``N`` arrivals over ``2**l``
equal time buckets by recursive bisection: at every split one half gets
the fraction ``b`` of the parent's volume and the other half ``1 - b``,
with a fair coin choosing which half is the heavy one.  ``b = 0.5`` is
uniform traffic; values towards 1 give increasingly bursty traffic.  A
fourth ingredient, the lifetime distribution, says how long each arriving
record stays valid.

Volumes stay integral: the heavy share is ``floor(v * b)`` plus one with
probability equal to the dropped fraction, so every split conserves its
volume exactly.
"""

from __future__ import annotations

import io
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, TextIO, Union

from expiretreap.treap import INFINITY

__all__ = [
    "AlwaysInfinite",
    "BModelParams",
    "Exponential",
    "Fixed",
    "UniformRange",
    "WorkloadTrace",
    "bucket_volumes",
    "dumps_trace",
    "generate",
    "parse_lifetime",
    "read_trace",
    "uniform_trace",
    "write_trace",
]


@dataclass(frozen=True)
class BModelParams:
    b: float
    l: int
    n: int
    seed: int = 0

    def __post_init__(self):
        if not 0.5 <= self.b < 1.0:
            raise ValueError(f"bias must lie in [0.5, 1.0), got {self.b}")
        if self.l < 0:
            raise ValueError("aggregation level must be non-negative")
        if self.n < 0:
            raise ValueError("total volume must be non-negative")


@dataclass(frozen=True)
class Fixed:
    d: int

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError("lifetime must be positive")

    def sample(self, rng: random.Random) -> int:
        return self.d

    def residual(self, rng: random.Random) -> int:
        return rng.randint(1, self.d)

    @property
    def mean(self) -> float:
        return self.d

    def __str__(self) -> str:
        return f"fixed:{self.d}"


@dataclass(frozen=True)
class UniformRange:
    lo: int
    hi: int

    def __post_init__(self):
        if not 0 < self.lo <= self.hi:
            raise ValueError("need 0 < lo <= hi")

    def sample(self, rng: random.Random) -> int:
        return rng.randint(self.lo, self.hi)

    def residual(self, rng: random.Random) -> int:
        # Length-biased draw (accept with probability L/hi), then a uniform point inside.
        while True:
            life = rng.randint(self.lo, self.hi)
            if rng.random() * self.hi < life:
                return rng.randint(1, life)

    @property
    def mean(self) -> float:
        return (self.lo + self.hi) / 2

    def __str__(self) -> str:
        return f"uniform:{self.lo}:{self.hi}"


@dataclass(frozen=True)
class Exponential:
    mean_ms: float

    def __post_init__(self):
        if self.mean_ms <= 0:
            raise ValueError("mean lifetime must be positive")

    def sample(self, rng: random.Random) -> int:
        return max(1, round(rng.expovariate(1.0 / self.mean_ms)))

    def residual(self, rng: random.Random) -> int:
        return self.sample(rng)  # memoryless

    @property
    def mean(self) -> float:
        return self.mean_ms

    def __str__(self) -> str:
        return f"exp:{self.mean_ms:g}"


@dataclass(frozen=True)
class AlwaysInfinite:
    def sample(self, rng: random.Random) -> float:
        return INFINITY

    def residual(self, rng: random.Random) -> float:
        return INFINITY

    @property
    def mean(self) -> float:
        return INFINITY

    def __str__(self) -> str:
        return "inf"


# ``residual`` draws the remaining lifetime of a record found alive in a
# steady-state database, which is what bootstrap records need.
Lifetime = Union[Fixed, UniformRange, Exponential, AlwaysInfinite]


def parse_lifetime(text: str) -> Lifetime:
    """Parse ``fixed:D``, ``uniform:LO:HI``, ``exp:MEAN`` or ``inf``."""
    kind, _, rest = text.strip().partition(":")
    try:
        if kind == "fixed":
            return Fixed(int(rest))
        if kind == "uniform":
            lo, hi = rest.split(":")
            return UniformRange(int(lo), int(hi))
        if kind in ("exp", "exponential"):
            return Exponential(float(rest))
        if kind == "inf" and not rest:
            return AlwaysInfinite()
    except ValueError as e:
        raise ValueError(f"bad lifetime {text!r}: {e}") from None
    raise ValueError(f"bad lifetime {text!r}; expected fixed:D, uniform:LO:HI, exp:MEAN or inf")


@dataclass
class WorkloadTrace:
    params: BModelParams
    lifetime: Lifetime
    bucket_ms: int
    counts: list[int]
    records: list[list[tuple[int, float]]]  # per bucket: (key, lifetime)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def arrivals(self) -> Iterator[tuple[int, int, float]]:
        """``(arrival_ms, key, lifetime)`` in arrival order."""
        for i, recs in enumerate(self.records):
            t = i * self.bucket_ms
            for key, life in recs:
                yield t, key, life

    @property
    def buckets(self) -> list[tuple[int, int]]:
        return list(enumerate(self.counts))

    @property
    def interval_duration(self) -> int:
        return self.bucket_ms

    @property
    def duration_ms(self) -> int:
        return len(self.counts) * self.bucket_ms


def _bias_ratio(b: float) -> tuple[int, int]:
    # The decimal the user wrote, not its binary approximation: 0.7 -> 7/10.
    f = Fraction(repr(b))
    return f.numerator, f.denominator


def bucket_volumes(b: float, l: int, n: int, rng: random.Random) -> list[int]:
    """Recursively bisect ``n`` over ``2**l`` buckets with bias ``b``."""
    num, den = _bias_ratio(b)
    vols = [n]
    for _ in range(l):
        nxt = []
        for v in vols:
            heavy, rem = divmod(v * num, den)
            if rem and rng.randrange(den) < rem:
                heavy += 1
            light = v - heavy
            if rng.random() < 0.5:
                nxt.append(heavy)
                nxt.append(light)
            else:
                nxt.append(light)
                nxt.append(heavy)
        vols = nxt
    return vols


def _assemble(params: BModelParams, lifetime: Lifetime, bucket_ms: int, counts: list[int],
              rng_keys: random.Random, rng_life: random.Random) -> WorkloadTrace:
    total = sum(counts)
    keys = list(range(total))
    rng_keys.shuffle(keys)
    records = []
    pos = 0
    for c in counts:
        records.append([(keys[pos + j], lifetime.sample(rng_life)) for j in range(c)])
        pos += c
    return WorkloadTrace(params, lifetime, bucket_ms, counts, records)


def _streams(seed: int) -> tuple[random.Random, random.Random, random.Random]:
    master = random.Random(seed)
    return (random.Random(master.getrandbits(64)),
            random.Random(master.getrandbits(64)),
            random.Random(master.getrandbits(64)))


def generate(params: BModelParams, lifetime: Lifetime, bucket_ms: int = 1) -> WorkloadTrace:
    """Bursty trace of ``params.n`` arrivals over ``2**params.l`` buckets.

    Keys are a seeded permutation of ``range(n)`` so key order carries no
    information about arrival time.
    """
    if bucket_ms <= 0:
        raise ValueError("bucket_ms must be positive")
    split, keys, life = _streams(params.seed)
    counts = bucket_volumes(params.b, params.l, params.n, split)
    return _assemble(params, lifetime, bucket_ms, counts, keys, life)


def uniform_trace(rate: int, duration: int, lifetime: Lifetime, bucket_ms: int = 1,
                  seed: int = 0) -> WorkloadTrace:
    """``rate`` arrivals in each of ``duration`` buckets."""
    if rate <= 0 or duration <= 0:
        raise ValueError("rate and duration must be positive")
    if bucket_ms <= 0:
        raise ValueError("bucket_ms must be positive")
    l = max(0, math.ceil(math.log2(duration)))
    params = BModelParams(0.5, l, rate * duration, seed)
    _, keys, life = _streams(seed)
    return _assemble(params, lifetime, bucket_ms, [rate] * duration, keys, life)


def _fmt_life(life: float) -> str:
    return "inf" if life == INFINITY else str(life)


def write_trace(trace: WorkloadTrace, out: Union[str, TextIO]) -> None:
    """Line format: a ``bmodel ...`` header, then ``<bucket> <key> <lifetime|inf>``."""
    if isinstance(out, str):
        with open(out, "w", encoding="ascii", newline="\n") as fh:
            write_trace(trace, fh)
        return
    p = trace.params
    out.write(f"bmodel b={p.b!r} l={p.l} N={p.n} seed={p.seed} bucket_ms={trace.bucket_ms}\n")
    for i, recs in enumerate(trace.records):
        out.write("".join(f"{i} {k} {_fmt_life(life)}\n" for k, life in recs))


def dumps_trace(trace: WorkloadTrace) -> str:
    buf = io.StringIO()
    write_trace(trace, buf)
    return buf.getvalue()


def read_trace(src: Union[str, TextIO], lifetime: Lifetime | None = None) -> WorkloadTrace:
    """Parse the format written by :func:`write_trace`.

    The lifetime distribution is not stored in the file; pass it if the
    caller needs it, otherwise the trace carries a placeholder.
    """
    if isinstance(src, str):
        with open(src, encoding="ascii") as fh:
            return read_trace(fh, lifetime)
    header = src.readline().split()
    if not header or header[0] != "bmodel":
        raise ValueError("not a trace file: missing 'bmodel' header")
    fields = dict(part.split("=", 1) for part in header[1:])
    try:
        params = BModelParams(float(fields["b"]), int(fields["l"]), int(fields["N"]), int(fields["seed"]))
        bucket_ms = int(fields["bucket_ms"])
    except KeyError as e:
        raise ValueError(f"trace header lacks {e.args[0]}") from None
    records: list[list[tuple[int, float]]] = []
    for lineno, line in enumerate(src, start=2):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected '<bucket> <key> <lifetime>'")
        b, k, life = int(parts[0]), int(parts[1]), parts[2]
        while len(records) <= b:
            records.append([])
        records[b].append((k, INFINITY if life == "inf" else int(life)))
    # Trailing empty buckets leave no lines behind; the level restores them.
    while len(records) < 2 ** params.l:
        records.append([])
    counts = [len(r) for r in records]
    return WorkloadTrace(params, lifetime if lifetime is not None else _Unknown(), bucket_ms, counts, records)


class _Unknown:
    mean = math.nan

    def sample(self, rng):
        raise ValueError("lifetime distribution not recorded in the trace file")

    def __str__(self) -> str:
        return "unknown"
