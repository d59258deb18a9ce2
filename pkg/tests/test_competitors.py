import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expiretreap import INFINITY, KeyNotFound
from expiretreap.competitors import (
    AvlTree,
    EagerHeap,
    ExpiringIndex,
    ExpiryHeap,
    HashIndex,
    PeriodicCleansing,
    RedBlackTree,
    strat_step,
)
from expiretreap.store import ExpirableStore

INDEXES = [AvlTree, RedBlackTree, HashIndex]


def contents(index):
    return sorted(index.items())


@pytest.mark.parametrize("cls", INDEXES)
def test_random_ops_match_sorted_map(cls):
    rng = random.Random(7)
    t = cls()
    oracle = {}
    for i in range(10_000):
        k = rng.randrange(2000)
        if rng.random() < 0.6:
            e = rng.randrange(10**6)
            assert t.insert(k, e, i) == (k not in oracle)
            oracle.setdefault(k, (e, i))
        elif k in oracle:
            t.remove(k)
            del oracle[k]
        else:
            with pytest.raises(KeyNotFound):
                t.remove(k)
        if i % 500 == 0:
            t.check()
    t.check()
    assert contents(t) == sorted((k, e, v) for k, (e, v) in oracle.items())
    assert len(t) == len(oracle)
    for k in range(2000):
        if k in oracle:
            assert t.find(k) == oracle[k][1]
        else:
            with pytest.raises(KeyNotFound):
                t.find(k)


@pytest.mark.parametrize("cls", [AvlTree, RedBlackTree])
def test_tree_traversal_is_sorted(cls):
    rng = random.Random(1)
    t = cls()
    for k in rng.sample(range(10**6), 3000):
        t.insert(k, 0)
    keys = [k for k, _, _ in t.items()]
    assert keys == sorted(keys)


def test_avl_height_bound_on_ascending_input():
    t = AvlTree()
    for k in range(1, 1001):
        t.insert(k, k)
    t.check()
    # Heights count nodes, so depth = height - 1.
    assert t.height() - 1 <= 1.44 * math.log2(1001)


def test_redblack_invariants_after_random_ops():
    rng = random.Random(12)
    t = RedBlackTree()
    present = []
    for _ in range(10_000):
        if present and rng.random() < 0.45:
            k = present.pop(rng.randrange(len(present)))
            t.remove(k)
        else:
            k = rng.randrange(10**9)
            if t.insert(k, 0):
                present.append(k)
    t.check()
    assert len(t) == len(present)


@pytest.mark.parametrize("cls", [AvlTree, RedBlackTree, HashIndex])
def test_from_sorted(cls):
    recs = [(k, k % 7, -k) for k in range(0, 3000, 3)]
    t = cls.from_sorted(recs)
    t.check()
    assert contents(t) == recs
    t.insert(1, 1)
    t.remove(3)
    t.check()
    assert cls.from_sorted([]).items() is not None
    assert len(cls.from_sorted([])) == 0


def test_hash_resizes_both_ways():
    h = HashIndex()
    for k in range(10_000):
        h.insert(k, k)
    assert h.capacity >= 10_000 / 0.75
    h.check()
    grown = h.capacity
    for k in range(9_990):
        h.remove(k)
    h.check()
    assert h.capacity < grown
    assert h.load_factor >= 0.125 or h.capacity == h.min_buckets
    assert sorted(k for k, _, _ in h.items()) == list(range(9_990, 10_000))


# -- heap ----------------------------------------------------------------------

def test_heap_pops_in_order():
    rng = random.Random(3)
    h = ExpiryHeap()
    exps = {}
    for k in range(2000):
        e = rng.randrange(10_000)
        h.push(k, e)
        exps[k] = e
    h.check()
    out = h.pop_expired(10**9)
    assert [exps[k] for k in out] == sorted(exps.values())
    assert len(h) == 0


def test_heap_lazy_deletion_and_compaction():
    h = ExpiryHeap()
    for k in range(100):
        h.push(k, k)
    for k in range(0, 100, 2):
        assert h.discard(k)
    assert not h.discard(0)
    h.check()
    assert len(h) == 50
    h.discard(1)  # 51 dead > 50% of 100 slots
    assert h.rebuilds == 1 and h.tombstones == 0 and h.physical_size == 49
    h.check()
    assert h.peek() == (3, 3)
    assert h.pop_expired(10) == [3, 5, 7, 9]


def test_heap_reinsert_same_key_after_discard():
    h = ExpiryHeap()
    h.push("a", 5)
    h.discard("a")
    h.push("a", 5)
    assert h.pop_expired(5) == ["a"]
    assert h.tombstones == 0
    h.check()


def test_heap_rejects_infinity():
    with pytest.raises(ValueError):
        ExpiryHeap().push(1, INFINITY)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("pdx"), st.integers(0, 30), st.integers(0, 100)), max_size=200))
def test_heap_against_dict(ops):
    h = ExpiryHeap()
    model = {}
    for op, k, e in ops:
        if op == "p":
            h.push(k, e)
            model[k] = e
        elif op == "d":
            assert h.discard(k) == (k in model)
            model.pop(k, None)
        else:
            got = h.pop_expired(e)
            want = {q for q, t in model.items() if t <= e}
            assert set(got) == want
            for q in got:
                del model[q]
        h.check()
        assert len(h) == len(model)


# -- strategies -------------------------------------------------------------------

def test_strategy_preconditions():
    with pytest.raises(ValueError):
        strat_step(AvlTree(), None, EagerHeap(), 0)
    with pytest.raises(ValueError):
        strat_step(AvlTree(), ExpiryHeap(), PeriodicCleansing(10), 0)
    with pytest.raises(ValueError):
        PeriodicCleansing(0)


def test_eager_nothing_due():
    ix = ExpiringIndex(AvlTree(), EagerHeap())
    ix.insert(1, 100)
    assert ix.step(99) == 0


@pytest.mark.parametrize("cls", INDEXES)
def test_periodic_cleansing_removes_oracle_set(cls):
    rng = random.Random(5)
    ix = ExpiringIndex(cls(), PeriodicCleansing(100))
    oracle = {}
    for k in range(3000):
        e = INFINITY if rng.random() < 0.05 else rng.randrange(1, 1000)
        ix.insert(k, e)
        oracle[k] = e
    assert ix.step(99) == 0  # before the first boundary
    n = ix.step(250)
    want = {k for k, e in oracle.items() if e <= 250}
    assert n == len(want)
    assert {k for k, _, _ in ix.items()} == set(oracle) - want
    assert ix.step(260) == 0  # next boundary is 300
    assert ix.strategy.next_boundary == 300


@pytest.mark.parametrize("cls", INDEXES)
def test_eager_heap_stays_synchronised(cls):
    rng = random.Random(6)
    ix = ExpiringIndex(cls(), EagerHeap())
    now = 0
    for i in range(5000):
        k = rng.randrange(3000)
        r = rng.random()
        if r < 0.6:
            ix.insert(k, INFINITY if rng.random() < 0.05 else now + rng.randrange(1, 500), i)
        elif r < 0.75:
            try:
                ix.remove(k)
            except KeyNotFound:
                pass
        else:
            now += rng.randrange(20)
            ix.step(now)
            assert all(e > now for _, e, _ in ix.items())
        finite = sum(1 for _, e, _ in ix.items() if e != INFINITY)
        if i % 250 == 0:
            ix.heap.check()
        assert len(ix.heap) == finite
        assert all(k in ix.heap or e == INFINITY for k, e, _ in ix.items())


def test_memory_proxy_counts_heap():
    ix = ExpiringIndex(RedBlackTree(), EagerHeap())
    for k in range(10):
        ix.insert(k, k + 1 if k < 8 else INFINITY)
    assert ix.memory_proxy == 10 + 8
    assert ExpiringIndex(RedBlackTree(), PeriodicCleansing(5)).memory_proxy == 0


@pytest.mark.parametrize("cls", INDEXES)
@pytest.mark.parametrize("eager", [True, False])
def test_same_logical_contents_as_treap_store(cls, eager):
    rng = random.Random(10)
    store = ExpirableStore(cadence_ms=50)
    ix = ExpiringIndex(cls(), EagerHeap() if eager else PeriodicCleansing(50))
    for i in range(3000):
        now = store.now()
        k = rng.randrange(1000)
        e = now + rng.randrange(1, 300)
        visible_store = k in store
        if not visible_store:
            try:
                # a logically expired record may still sit in the baseline
                if ix.index.find(k) is not None:
                    ix.remove(k)
            except KeyNotFound:
                pass
        store.put(k, e, i)
        ix.insert(k, e, i)
        if rng.random() < 0.2:
            store.advance(rng.randrange(15))
            ix.step(store.now())
        if i % 100 == 0:
            now = store.now()
            assert sorted((k, v) for k, e, v in ix.items() if e > now) == store.items()
