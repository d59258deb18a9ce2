"""Mutable AVL tree holding ``(key, expiration, payload)`` records."""

from __future__ import annotations

from typing import Any, Iterable, Iterator, Optional

from expiretreap.errors import KeyNotFound


class _Node:
    __slots__ = ("key", "exp", "payload", "left", "right", "height")

    def __init__(self, key, exp, payload, left=None, right=None, height=1):
        self.key = key
        self.exp = exp
        self.payload = payload
        self.left = left
        self.right = right
        self.height = height


def _h(n: Optional[_Node]) -> int:
    return n.height if n is not None else 0


def _fix(n: _Node) -> None:
    hl = n.left.height if n.left is not None else 0
    hr = n.right.height if n.right is not None else 0
    n.height = (hl if hl > hr else hr) + 1


def _rotate_right(n: _Node) -> _Node:
    l = n.left
    n.left = l.right
    l.right = n
    _fix(n)
    _fix(l)
    return l


def _rotate_left(n: _Node) -> _Node:
    r = n.right
    n.right = r.left
    r.left = n
    _fix(n)
    _fix(r)
    return r


def _balance(n: _Node) -> _Node:
    _fix(n)
    bf = _h(n.left) - _h(n.right)
    if bf > 1:
        if _h(n.left.left) < _h(n.left.right):
            n.left = _rotate_left(n.left)
        return _rotate_right(n)
    if bf < -1:
        if _h(n.right.right) < _h(n.right.left):
            n.right = _rotate_right(n.right)
        return _rotate_left(n)
    return n


class AvlTree:
    """Height-balanced BST; duplicate inserts are ignored like in the treap."""

    name = "avl"

    def __init__(self):
        self.root: Optional[_Node] = None
        self._size = 0

    def __len__(self) -> int:
        return self._size

    @classmethod
    def from_sorted(cls, records: Iterable) -> "AvlTree":
        """Build from records already sorted by strictly increasing key."""
        recs = list(records)

        def build(lo, hi):
            if lo >= hi:
                return None
            mid = (lo + hi) // 2
            k, e, v = recs[mid]
            n = _Node(k, e, v, build(lo, mid), build(mid + 1, hi))
            _fix(n)
            return n

        t = cls()
        t.root = build(0, len(recs))
        t._size = len(recs)
        return t

    def insert(self, key, exp, payload: Any = None) -> bool:
        inserted = False

        def ins(n):
            nonlocal inserted
            if n is None:
                inserted = True
                return _Node(key, exp, payload)
            if key < n.key:
                n.left = ins(n.left)
            elif n.key < key:
                n.right = ins(n.right)
            else:
                return n
            return _balance(n) if inserted else n

        self.root = ins(self.root)
        if inserted:
            self._size += 1
        return inserted

    def remove(self, key) -> None:
        def rem(n):
            if n is None:
                raise KeyNotFound(key)
            if key < n.key:
                n.left = rem(n.left)
            elif n.key < key:
                n.right = rem(n.right)
            else:
                if n.left is None:
                    return n.right
                if n.right is None:
                    return n.left
                # Replace with the in-order successor.
                s = n.right
                while s.left is not None:
                    s = s.left
                n.key, n.exp, n.payload = s.key, s.exp, s.payload
                n.right = _remove_min(n.right)
            return _balance(n)

        self.root = rem(self.root)
        self._size -= 1

    def find(self, key) -> Any:
        n = self.root
        while n is not None:
            if key < n.key:
                n = n.left
            elif n.key < key:
                n = n.right
            else:
                return n.payload
        raise KeyNotFound(key)

    def items(self) -> Iterator[tuple]:
        stack = []
        n = self.root
        while True:
            while n is not None:
                stack.append(n)
                n = n.left
            if not stack:
                return
            n = stack.pop()
            yield (n.key, n.exp, n.payload)
            n = n.right

    def expired_keys(self, now) -> list:
        return [k for k, e, _ in self.items() if e <= now]

    def height(self) -> int:
        return _h(self.root)

    def check(self) -> None:
        """Assert AVL balance, stored heights and BST order."""

        def walk(n, lo, hi):
            if n is None:
                return 0
            assert (lo is None or lo < n.key) and (hi is None or n.key < hi), "BST order"
            hl = walk(n.left, lo, n.key)
            hr = walk(n.right, n.key, hi)
            assert abs(hl - hr) <= 1, f"balance factor {hl - hr} at {n.key!r}"
            assert n.height == max(hl, hr) + 1, "stale height"
            return n.height

        walk(self.root, None, None)
        assert sum(1 for _ in self.items()) == self._size


def _remove_min(n: _Node) -> Optional[_Node]:
    if n.left is None:
        return n.right
    n.left = _remove_min(n.left)
    return _balance(n)
