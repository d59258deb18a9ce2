import io
import random
from statistics import mean

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expiretreap import INFINITY
from expiretreap.workload import (
    AlwaysInfinite,
    BModelParams,
    Exponential,
    Fixed,
    UniformRange,
    bucket_volumes,
    dumps_trace,
    generate,
    parse_lifetime,
    read_trace,
    uniform_trace,
    write_trace,
)


def reference_bmodel(b, l, n, rng):
    """Recursive float formulation, written independently of the library."""

    def split(v, depth):
        if depth == 0:
            return [v]
        share = v * b
        heavy = int(share) + (1 if rng.random() < share - int(share) else 0)
        halves = [heavy, v - heavy] if rng.random() < 0.5 else [v - heavy, heavy]
        return split(halves[0], depth - 1) + split(halves[1], depth - 1)

    return split(n, l)


def test_params_validation():
    for bad in [dict(b=0.49, l=1, n=1), dict(b=1.0, l=1, n=1), dict(b=0.6, l=-1, n=1), dict(b=0.6, l=1, n=-1)]:
        with pytest.raises(ValueError):
            BModelParams(**bad)
    BModelParams(0.5, 0, 0)


def test_uniform_split_is_exact():
    t = generate(BModelParams(0.5, 2, 1024, seed=3), Fixed(10))
    assert t.counts == [256, 256, 256, 256]


def test_single_bisection():
    for seed in range(20):
        t = generate(BModelParams(0.7, 1, 1000, seed=seed), Fixed(10))
        assert sorted(t.counts) == [300, 700]


@settings(max_examples=300, deadline=None)
@given(st.floats(0.5, 0.999), st.integers(0, 10), st.integers(0, 10**6), st.integers(0, 2**64 - 1))
def test_volume_conservation(b, l, n, seed):
    vols = bucket_volumes(b, l, n, random.Random(seed))
    assert len(vols) == 2**l
    assert sum(vols) == n
    assert min(vols) >= 0


def test_burstiness_matches_reference_implementation():
    b, l, n = 0.695234, 10, 10**6
    ours, ref = [], []
    for seed in range(20):
        ours.append(max(bucket_volumes(b, l, n, random.Random(seed))) / (n / 2**l))
        ref.append(max(reference_bmodel(b, l, n, random.Random(10_000 + seed))) / (n / 2**l))
    assert abs(mean(ours) / mean(ref) - 1) <= 0.20


def test_generate_uses_full_volume_at_scale():
    t = generate(BModelParams(0.695234, 10, 10**6, seed=4), Fixed(1))
    assert t.total == 10**6 and len(t.counts) == 1024


def test_bias_monotone_in_max_bucket():
    l, n = 8, 100_000
    means = []
    for b in (0.5, 0.6, 0.7, 0.8):
        means.append(mean(max(bucket_volumes(b, l, n, random.Random(s))) for s in range(100)))
    assert means == sorted(means)


def test_keys_unique_and_independent_of_arrival():
    t = generate(BModelParams(0.7, 6, 5000, seed=1), Fixed(5))
    keys = [k for _, k, _ in t.arrivals()]
    assert sorted(keys) == list(range(5000))
    assert keys != sorted(keys)


def test_deterministic_bytes():
    p = BModelParams(0.695234, 5, 2000, seed=99)
    a = dumps_trace(generate(p, Exponential(300), bucket_ms=4))
    b = dumps_trace(generate(p, Exponential(300), bucket_ms=4))
    assert a == b
    assert a != dumps_trace(generate(BModelParams(0.695234, 5, 2000, seed=100), Exponential(300), bucket_ms=4))


def test_trace_golden():
    t = generate(BModelParams(0.5, 1, 4, seed=7), Fixed(500), bucket_ms=10)
    text = dumps_trace(t)
    lines = text.splitlines()
    assert lines[0] == "bmodel b=0.5 l=1 N=4 seed=7 bucket_ms=10"
    assert [ln.split()[0] for ln in lines[1:]] == ["0", "0", "1", "1"]
    assert all(ln.endswith(" 500") for ln in lines[1:])
    assert text.endswith("\n")


def test_trace_roundtrip(tmp_path):
    t = generate(BModelParams(0.8, 6, 300, seed=2), UniformRange(10, 20), bucket_ms=3)
    path = str(tmp_path / "t.txt")
    write_trace(t, path)
    back = read_trace(path)
    assert back.params == t.params
    assert back.counts == t.counts
    assert back.records == t.records
    assert dumps_trace(back) == dumps_trace(t)


def test_infinite_lifetimes_serialise():
    t = generate(BModelParams(0.5, 1, 2), AlwaysInfinite())
    text = dumps_trace(t)
    assert text.splitlines()[1].endswith(" inf")
    assert all(life == INFINITY for _, _, life in read_trace(io.StringIO(text)).arrivals())


def test_read_rejects_garbage():
    with pytest.raises(ValueError):
        read_trace(io.StringIO("hello\n"))
    with pytest.raises(ValueError):
        read_trace(io.StringIO("bmodel b=0.5 l=0 N=1 seed=0 bucket_ms=1\n0 1\n"))
    with pytest.raises(ValueError):
        read_trace(io.StringIO("bmodel b=0.5 l=0 N=1\n"))


def test_uniform_trace():
    t = uniform_trace(100, 10, Fixed(40), bucket_ms=5)
    assert t.total == 1000
    assert t.counts == [100] * 10
    for arrival, key, life in t.arrivals():
        assert arrival + life == arrival + 40
    assert len({k for _, k, _ in t.arrivals()}) == 1000
    with pytest.raises(ValueError):
        uniform_trace(0, 10, Fixed(1))


def test_uniform_trace_agrees_with_unbiased_generate():
    g = generate(BModelParams(0.5, 4, 1600, seed=1), Fixed(1))
    u = uniform_trace(100, 16, Fixed(1), seed=1)
    assert g.counts == u.counts


def test_lifetime_samples_positive():
    rng = random.Random(0)
    for ltd in (Fixed(3), UniformRange(1, 9), Exponential(0.3), Exponential(500)):
        assert all(ltd.sample(rng) > 0 for _ in range(2000))
    assert 1 <= min(UniformRange(1, 9).sample(rng) for _ in range(500))
    assert max(UniformRange(1, 9).sample(rng) for _ in range(500)) <= 9


@pytest.mark.parametrize("text,want", [
    ("fixed:500", Fixed(500)),
    ("uniform:10:20", UniformRange(10, 20)),
    ("exp:250", Exponential(250.0)),
    ("inf", AlwaysInfinite()),
])
def test_parse_lifetime(text, want):
    assert parse_lifetime(text) == want
    assert parse_lifetime(str(want)) == want


@pytest.mark.parametrize("text", ["fixed", "fixed:-1", "uniform:5", "uniform:9:3", "exp:0", "gamma:2", "inf:3"])
def test_parse_lifetime_rejects(text):
    with pytest.raises(ValueError):
        parse_lifetime(text)


@pytest.mark.parametrize("ltd,want", [(Fixed(100), 50.5), (UniformRange(10, 30), (30**3 - 10**3) / 3 / (30**2 - 10**2) / 1), (Exponential(40), 40)])
def test_residual_lifetime_mean(ltd, want):
    # Steady-state residual life has mean E[L^2] / (2 E[L]) for continuous L.
    rng = random.Random(3)
    got = mean(ltd.residual(rng) for _ in range(40_000))
    assert got == pytest.approx(want, rel=0.05)
    assert AlwaysInfinite().residual(rng) == INFINITY
