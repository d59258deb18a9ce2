"""Fully persistent treaps for data with expiration times.

A treap here is a binary search tree on the record key and, at the same
time, a min-heap on the record's expiration time.  Records that expire
first cluster at the root, so eager expiration is just "remove the root
while it is stale".

Every update returns a new :class:`TreapSnapshot` and leaves the old one
untouched.  Only the nodes on the modified path are copied; everything
else is shared between versions, and CPython's reference counting
reclaims a node as soon as no live snapshot reaches it.

All descents are iterative with an explicit path list, so a badly
unbalanced treap (correlated keys and expiration times) costs time but
never overflows the interpreter stack.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, NamedTuple, Optional

from expiretreap.errors import InvalidRange, InvariantViolation, KeyNotFound, RangeUnsupported

__all__ = [
    "INFINITY",
    "DepthStats",
    "ExtendedComparator",
    "KeyHasher",
    "Node",
    "Record",
    "TreapSnapshot",
    "build",
    "empty",
    "validate",
]

#: Expiration time of records that never expire.  Finite expiration times
#: are plain ``int`` milliseconds; ``int`` and ``float('inf')`` compare
#: natively, which keeps the hot loops free of wrapper objects.
INFINITY = math.inf

_MASK64 = (1 << 64) - 1


#: Inner nodes are plain 5-tuples ``(left, key, expiration, payload, right)``;
#: the empty tree (leaf) is ``None``.  Tuples are immutable and are the
#: cheapest object CPython can allocate, which matters because every
#: update allocates a fresh root-to-leaf path.
Node = tuple
LEFT, KEY, EXPIRATION, PAYLOAD, RIGHT = range(5)


class Record(NamedTuple):
    key: Any
    expiration: float
    payload: Any


class DepthStats(NamedTuple):
    max_depth: int
    mean_depth: Fraction


# Bypasses the generated NamedTuple.__new__ for records.
_new = tuple.__new__


class ExtendedComparator:
    """Strict order on expiration times with a coin flip for infinity ties.

    Finite values compare numerically and every finite value is below
    infinity.  Two infinite values compare true or false with probability
    one half each, so records that never expire still get a random shape.
    """

    def __init__(self, seed: Optional[int] = None):
        self.rng = random.Random(seed)

    def coin(self) -> bool:
        return self.rng.random() < 0.5

    def less(self, x: float, y: float) -> bool:
        if x == INFINITY and y == INFINITY:
            return self.coin()
        return x < y


def _unshift(y: int, shift: int) -> int:
    x = y
    for _ in range(64 // shift + 1):
        x = y ^ (x >> shift)
    return x


class KeyHasher:
    """Bijective 64-bit key scrambler (SplitMix64 finalizer).

    ``KeyHasher()`` is the identity.  ``KeyHasher(seed)`` destroys key
    order but keeps equality; because the mixer is a bijection on 64-bit
    words, distinct keys never collide and :meth:`decode` recovers the
    original key.
    """

    _M1 = 0xBF58476D1CE4E5B9
    _M2 = 0x94D049BB133111EB
    _M1_INV = pow(_M1, -1, 1 << 64)
    _M2_INV = pow(_M2, -1, 1 << 64)

    def __init__(self, seed: Optional[int] = None):
        self.seed = seed
        self.hashed = seed is not None
        self._offset = (seed or 0) & _MASK64

    def __repr__(self) -> str:
        return f"KeyHasher(seed={self.seed!r})" if self.hashed else "KeyHasher()"

    def encode(self, key: int) -> int:
        if not self.hashed:
            return key
        if not 0 <= key <= _MASK64:
            raise ValueError(f"hashed keys must be unsigned 64-bit integers, got {key!r}")
        x = (key + self._offset) & _MASK64
        x = ((x ^ (x >> 30)) * self._M1) & _MASK64
        x = ((x ^ (x >> 27)) * self._M2) & _MASK64
        return x ^ (x >> 31)

    def decode(self, code: int) -> int:
        if not self.hashed:
            return code
        x = _unshift(code, 31)
        x = _unshift((x * self._M2_INV) & _MASK64, 27)
        x = _unshift((x * self._M1_INV) & _MASK64, 30)
        return (x - self._offset) & _MASK64


class _Family:
    """State shared by every snapshot derived from one ``empty()`` call."""

    __slots__ = ("comparator", "hasher")

    def __init__(self, comparator: ExtendedComparator, hasher: KeyHasher):
        self.comparator = comparator
        self.hasher = hasher


def _percolate(left: Optional[Node], right: Optional[Node], coin: Callable[[], bool]) -> Optional[Node]:
    """Subtree that replaces a node with children ``left``/``right`` once it is removed.

    The doomed node is rotated down towards the child with the smaller
    expiration time (the left one on ties) until one side is empty; the
    other side then takes its place.  Rotations along the way copy the
    promoted children, which are collected and rebuilt bottom-up.
    """
    spine = []
    while True:
        if left is None:
            sub = right
            break
        if right is None:
            sub = left
            break
        lt = left[2]
        rt = right[2]
        if lt < rt or (lt == rt and (lt != INFINITY or coin())):
            spine.append((True, left))
            left = left[4]
        else:
            spine.append((False, right))
            right = right[0]
    for promoted_left, (nl, nk, nt, nv, nr) in reversed(spine):
        if promoted_left:
            sub = (nl, nk, nt, nv, sub)
        else:
            sub = (sub, nk, nt, nv, nr)
    return sub


def _copy_path(path: list, sub: Optional[Node], key) -> Optional[Node]:
    for pl, pk, pt, pv, pr in reversed(path):
        if key < pk:
            sub = (sub, pk, pt, pv, pr)
        else:
            sub = (pl, pk, pt, pv, sub)
    return sub


class TreapSnapshot:
    """One immutable version of a treap.

    Snapshots are cheap handles (root node, record count, shared family
    state) and are safe to pass between threads.  Updates return new
    snapshots.  The treap itself is time-agnostic: expired records stay
    visible to :meth:`find`, :meth:`range` and :meth:`traverse` until
    :meth:`expire` removes them.
    """

    __slots__ = ("root", "count", "_family")

    def __init__(self, root: Optional[Node], count: int, family: _Family):
        self.root = root
        self.count = count
        self._family = family

    def __len__(self) -> int:
        return self.count

    def __bool__(self) -> bool:
        return self.count > 0

    def __repr__(self) -> str:
        return f"<TreapSnapshot count={self.count} hasher={self._family.hasher!r}>"

    @property
    def comparator(self) -> ExtendedComparator:
        return self._family.comparator

    @property
    def hasher(self) -> KeyHasher:
        return self._family.hasher

    def _derive(self, root: Optional[Node], count: int) -> "TreapSnapshot":
        return TreapSnapshot(root, count, self._family)

    # -- queries ---------------------------------------------------------

    def find(self, key) -> Any:
        """Payload stored under ``key``; raises :class:`KeyNotFound` otherwise."""
        k = self._family.hasher.encode(key)
        node = self.root
        while node is not None:
            nk = node[1]
            if k == nk:
                return node[3]
            node = node[0] if k < nk else node[4]
        raise KeyNotFound(key)

    def lookup(self, key) -> Optional[Record]:
        """Full record for ``key`` or ``None``."""
        k = self._family.hasher.encode(key)
        node = self.root
        while node is not None:
            nk = node[1]
            if k == nk:
                return Record(key, node[2], node[3])
            node = node[0] if k < nk else node[4]
        return None

    def __contains__(self, key) -> bool:
        return self.lookup(key) is not None

    def min_expiration(self) -> Optional[float]:
        """Smallest stored expiration time, read straight off the root; ``None`` if empty."""
        return None if self.root is None else self.root[2]

    def _nodes_in_order(self) -> Iterator[Node]:
        stack = []
        node = self.root
        while True:
            while node is not None:
                stack.append(node)
                node = node[0]
            if not stack:
                return
            node = stack.pop()
            yield node
            node = node[4]

    def items(self) -> Iterator[Record]:
        """Lazily yield records in key order."""
        hasher = self._family.hasher
        if hasher.hashed:
            decode = hasher.decode
            for n in self._nodes_in_order():
                yield _new(Record, (decode(n[1]), n[2], n[3]))
        else:
            for n in self._nodes_in_order():
                yield _new(Record, (n[1], n[2], n[3]))

    __iter__ = items

    def traverse(self) -> list[Record]:
        """All records in key order (in hashed mode: in hashed-key order)."""
        return list(self.items())

    def keys(self) -> list:
        return [r.key for r in self.items()]

    def range(self, lo, hi) -> list[Record]:
        """Records with ``lo <= key <= hi`` in key order.

        Subtrees that lie entirely outside the interval are never entered.
        """
        if self._family.hasher.hashed:
            raise RangeUnsupported("range scans need key order; this treap hashes its keys")
        if hi < lo:
            raise InvalidRange(f"empty interval: lo={lo!r} > hi={hi!r}")
        out = []
        stack = []
        node = self.root
        while True:
            if node is not None:
                if node[1] < lo:
                    node = node[4]
                else:
                    stack.append(node)
                    node = node[0]
            elif stack:
                node = stack.pop()
                if node[1] > hi:
                    break
                out.append(_new(Record, (node[1], node[2], node[3])))
                node = node[4]
            else:
                break
        return out

    def depth_stats(self) -> DepthStats:
        """Exact maximum and mean node depth (root at depth 0).

        The empty treap reports ``(0, 0)``.
        """
        if self.root is None:
            return DepthStats(0, Fraction(0))
        total = 0
        deepest = 0
        n = 0
        level = [self.root]
        depth = 0
        while level:
            n += len(level)
            total += depth * len(level)
            deepest = depth
            nxt = []
            for node in level:
                if node[0] is not None:
                    nxt.append(node[0])
                if node[4] is not None:
                    nxt.append(node[4])
            level = nxt
            depth += 1
        return DepthStats(deepest, Fraction(total, n))

    def dump(self) -> str:
        """Indented pre-order listing, one ``key expiration depth=d`` line per node."""
        lines = []
        decode = self._family.hasher.decode
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            if node is None:
                continue
            exp = "inf" if node[2] == INFINITY else str(node[2])
            lines.append(f"{'  ' * depth}{decode(node[1])} {exp} depth={depth}")
            stack.append((node[4], depth + 1))
            stack.append((node[0], depth + 1))
        return "\n".join(lines) + ("\n" if lines else "")

    # -- updates ---------------------------------------------------------

    def insert(self, key, expiration: float, payload: Any = None) -> "TreapSnapshot":
        """Snapshot with the record added.

        Inserting a key that is already present returns ``self``: the
        stored record (including its expiration time) is left as is.  Use
        :meth:`upsert` to replace it.
        """
        family = self._family
        k = family.hasher.encode(key) if family.hasher.hashed else key
        # One comparison per level; the last node we went right from is the
        # only one whose key can equal k.
        path = []
        append = path.append
        node = self.root
        cand = None
        while node is not None:
            append(node)
            if k < node[1]:
                node = node[0]
            else:
                cand = node
                node = node[4]
        if cand is not None and cand[1] == k:
            return self

        coin = family.comparator.coin
        sub = (None, k, expiration, payload, None)
        # Rotate the new node up while it expires strictly before its parent.
        # Once it stops, the subtree root is an original node whose heap
        # position was already valid, so the remaining levels only need
        # copying (unless two infinite expiration times ask for a coin flip).
        t = expiration
        i = len(path) - 1
        while i >= 0:
            pl, pk, pt, pv, pr = path[i]
            if t < pt or (t == pt == INFINITY and coin()):
                if k < pk:
                    sl, sk, st, sv, sr = sub
                    sub = (sl, sk, st, sv, (sr, pk, pt, pv, pr))
                else:
                    sl, sk, st, sv, sr = sub
                    sub = ((pl, pk, pt, pv, sl), sk, st, sv, sr)
            else:
                sub = (sub, pk, pt, pv, pr) if k < pk else (pl, pk, pt, pv, sub)
                if pt != INFINITY:
                    break
                t = pt
            i -= 1
        while i > 0:
            i -= 1
            pl, pk, pt, pv, pr = path[i]
            sub = (sub, pk, pt, pv, pr) if k < pk else (pl, pk, pt, pv, sub)
        return TreapSnapshot(sub, self.count + 1, self._family)

    def remove(self, key) -> "TreapSnapshot":
        """Snapshot without ``key``; raises :class:`KeyNotFound` if absent."""
        k = self._family.hasher.encode(key)
        path = []
        node = self.root
        while node is not None:
            nk = node[1]
            if k == nk:
                break
            path.append(node)
            node = node[0] if k < nk else node[4]
        else:
            raise KeyNotFound(key)
        sub = _percolate(node[0], node[4], self._family.comparator.coin)
        return TreapSnapshot(_copy_path(path, sub, k), self.count - 1, self._family)

    def discard(self, key) -> "TreapSnapshot":
        try:
            return self.remove(key)
        except KeyNotFound:
            return self

    def upsert(self, key, expiration: float, payload: Any = None) -> "TreapSnapshot":
        """Insert, replacing any existing record for ``key``."""
        return self.discard(key).insert(key, expiration, payload)

    def expire(self, now: float) -> tuple["TreapSnapshot", list[Record]]:
        """Remove every record with ``expiration <= now``.

        Returns the new snapshot and the expelled records in removal order,
        which is non-decreasing in expiration time.  Records with infinite
        expiration are never expelled.
        """
        if now == INFINITY:
            raise ValueError("expire() needs a finite time")
        root = self.root
        if root is None or root[2] > now:
            return self, []
        coin = self._family.comparator.coin
        decode = self._family.hasher.decode
        expelled = []
        while root is not None and root[2] <= now:
            expelled.append(_new(Record, (decode(root[1]), root[2], root[3])))
            root = _percolate(root[0], root[4], coin)
        return TreapSnapshot(root, self.count - len(expelled), self._family), expelled

    def expire_count(self, now: float) -> tuple["TreapSnapshot", int]:
        """Like :meth:`expire` but only counts; avoids building record tuples."""
        root = self.root
        if root is None or root[2] > now:
            return self, 0
        if now == INFINITY:
            raise ValueError("expire() needs a finite time")
        coin = self._family.comparator.coin
        n = 0
        while root is not None and root[2] <= now:
            root = _percolate(root[0], root[4], coin)
            n += 1
        return TreapSnapshot(root, self.count - n, self._family), n


def empty(seed: Optional[int] = None, hash_seed: Optional[int] = None) -> TreapSnapshot:
    """A new, empty treap family.

    ``seed`` drives the coin used when two infinite expiration times meet.
    Passing ``hash_seed`` switches to hashed keys: keys must then be
    unsigned 64-bit integers and range scans are unavailable.
    """
    return TreapSnapshot(None, 0, _Family(ExtendedComparator(seed), KeyHasher(hash_seed)))


def build(records: Iterable, seed: Optional[int] = None, hash_seed: Optional[int] = None,
          like: Optional[TreapSnapshot] = None) -> TreapSnapshot:
    """Bulk-load ``(key, expiration, payload)`` triples in O(n log n).

    Builds the Cartesian tree of the records with a stack.  When
    expiration times are distinct this is exactly the treap repeated
    :meth:`TreapSnapshot.insert` calls would produce, whatever their
    order.  Duplicate keys keep their first occurrence, as insert would.
    Pass ``like`` to join an existing family instead of creating one.
    """
    family = like._family if like is not None else _Family(ExtendedComparator(seed), KeyHasher(hash_seed))
    encode = family.hasher.encode
    coin = family.comparator.coin
    seen = {}
    for key, exp, payload in records:
        k = encode(key)
        if k not in seen:
            seen[k] = (exp, payload)
    keys = sorted(seen)
    n = len(keys)
    if n == 0:
        return TreapSnapshot(None, 0, family)

    exps = [seen[k][0] for k in keys]
    # Equal finite expiration times are ordered by a random tiebreak, which
    # shapes each tied group like a random BST (what inserting it in random
    # order gives) rather than a key-ordered spine.
    rand = family.comparator.rng.random
    tie = [rand() for _ in range(n)]
    left = [-1] * n
    right = [-1] * n
    stack: list[int] = []
    for i in range(n):
        e = exps[i]
        last = -1
        while stack:
            top = stack[-1]
            te = exps[top]
            if te > e or (te == e and (coin() if e == INFINITY else tie[top] > tie[i])):
                last = stack.pop()
            else:
                break
        left[i] = last
        if stack:
            right[stack[-1]] = i
        stack.append(i)
    root_index = stack[0]

    # Post-order construction so children exist before their parents.
    built: list[Optional[Node]] = [None] * n
    todo = [(root_index, False)]
    while todo:
        i, expanded = todo.pop()
        if expanded:
            k = keys[i]
            lc = built[left[i]] if left[i] >= 0 else None
            rc = built[right[i]] if right[i] >= 0 else None
            built[i] = (lc, k, exps[i], seen[k][1], rc)
        else:
            todo.append((i, True))
            if right[i] >= 0:
                todo.append((right[i], False))
            if left[i] >= 0:
                todo.append((left[i], False))
    return TreapSnapshot(built[root_index], n, family)


def validate(snapshot: TreapSnapshot) -> None:
    """Check BST order, heap order and the record count; raise on violation.

    Heap order is the deterministic part of the extended comparison: a
    child may not expire strictly before its parent, and two infinite
    expiration times are unconstrained.
    """
    count = 0
    stack = [] if snapshot.root is None else [(snapshot.root, None, None)]
    pop = stack.pop
    push = stack.append
    while stack:
        node, lo, hi = pop()
        count += 1
        left, k, t, _, right = node
        if (lo is not None and not lo < k) or (hi is not None and not k < hi):
            raise InvariantViolation(f"key {k!r} outside its search interval ({lo!r}, {hi!r})")
        if left is not None:
            if left[2] < t:
                raise InvariantViolation(
                    f"child {left[1]!r} expires at {left[2]!r}, before parent {k!r} at {t!r}")
            push((left, lo, k))
        if right is not None:
            if right[2] < t:
                raise InvariantViolation(
                    f"child {right[1]!r} expires at {right[2]!r}, before parent {k!r} at {t!r}")
            push((right, k, hi))
    if count != snapshot.count:
        raise InvariantViolation(f"snapshot claims {snapshot.count} records but holds {count}")
