"""Mutable red-black tree (CLRS formulation with a shared black sentinel)."""

from __future__ import annotations

from typing import Any, Iterable, Iterator

from expiretreap.errors import KeyNotFound

RED = True
BLACK = False


class _Node:
    __slots__ = ("key", "exp", "payload", "left", "right", "parent", "red")

    def __init__(self, key, exp, payload, nil, red=RED):
        self.key = key
        self.exp = exp
        self.payload = payload
        self.left = nil
        self.right = nil
        self.parent = nil
        self.red = red


class RedBlackTree:
    name = "redblack"

    def __init__(self):
        nil = _Node(None, None, None, None, BLACK)
        nil.left = nil.right = nil.parent = nil
        self.nil = nil
        self.root = nil
        self._size = 0

    def __len__(self) -> int:
        return self._size

    @classmethod
    def from_sorted(cls, records: Iterable) -> "RedBlackTree":
        """Build from records sorted by strictly increasing key.

        The midpoint build puts every leaf on the deepest two levels;
        colouring the deepest level red keeps black heights equal.
        """
        t = cls()
        recs = list(records)
        nil = t.nil
        if not recs:
            return t
        deepest = len(recs).bit_length() - 1

        def build(lo, hi, parent, depth):
            if lo >= hi:
                return nil
            mid = (lo + hi) // 2
            k, e, v = recs[mid]
            n = _Node(k, e, v, nil, RED if depth == deepest and deepest > 0 else BLACK)
            n.parent = parent
            n.left = build(lo, mid, n, depth + 1)
            n.right = build(mid + 1, hi, n, depth + 1)
            return n

        t.root = build(0, len(recs), nil, 0)
        t._size = len(recs)
        return t

    def _rotate_left(self, x: _Node) -> None:
        y = x.right
        x.right = y.left
        if y.left is not self.nil:
            y.left.parent = x
        y.parent = x.parent
        if x.parent is self.nil:
            self.root = y
        elif x is x.parent.left:
            x.parent.left = y
        else:
            x.parent.right = y
        y.left = x
        x.parent = y

    def _rotate_right(self, x: _Node) -> None:
        y = x.left
        x.left = y.right
        if y.right is not self.nil:
            y.right.parent = x
        y.parent = x.parent
        if x.parent is self.nil:
            self.root = y
        elif x is x.parent.right:
            x.parent.right = y
        else:
            x.parent.left = y
        y.right = x
        x.parent = y

    def insert(self, key, exp, payload: Any = None) -> bool:
        nil = self.nil
        parent = nil
        x = self.root
        while x is not nil:
            parent = x
            if key < x.key:
                x = x.left
            elif x.key < key:
                x = x.right
            else:
                return False
        z = _Node(key, exp, payload, nil)
        z.parent = parent
        if parent is nil:
            self.root = z
        elif key < parent.key:
            parent.left = z
        else:
            parent.right = z
        self._size += 1

        while z.parent.red:
            p = z.parent
            g = p.parent
            if p is g.left:
                u = g.right
                if u.red:
                    p.red = u.red = BLACK
                    g.red = RED
                    z = g
                else:
                    if z is p.right:
                        z = p
                        self._rotate_left(z)
                        p = z.parent
                    p.red = BLACK
                    g.red = RED
                    self._rotate_right(g)
            else:
                u = g.left
                if u.red:
                    p.red = u.red = BLACK
                    g.red = RED
                    z = g
                else:
                    if z is p.left:
                        z = p
                        self._rotate_right(z)
                        p = z.parent
                    p.red = BLACK
                    g.red = RED
                    self._rotate_left(g)
        self.root.red = BLACK
        return True

    def _node(self, key) -> _Node:
        nil = self.nil
        x = self.root
        while x is not nil:
            if key < x.key:
                x = x.left
            elif x.key < key:
                x = x.right
            else:
                return x
        raise KeyNotFound(key)

    def find(self, key) -> Any:
        return self._node(key).payload

    def _transplant(self, u: _Node, v: _Node) -> None:
        if u.parent is self.nil:
            self.root = v
        elif u is u.parent.left:
            u.parent.left = v
        else:
            u.parent.right = v
        v.parent = u.parent

    def remove(self, key) -> None:
        nil = self.nil
        z = self._node(key)
        y = z
        y_red = y.red
        if z.left is nil:
            x = z.right
            self._transplant(z, z.right)
        elif z.right is nil:
            x = z.left
            self._transplant(z, z.left)
        else:
            y = z.right
            while y.left is not nil:
                y = y.left
            y_red = y.red
            x = y.right
            if y.parent is z:
                x.parent = y
            else:
                self._transplant(y, y.right)
                y.right = z.right
                y.right.parent = y
            self._transplant(z, y)
            y.left = z.left
            y.left.parent = y
            y.red = z.red
        self._size -= 1
        if not y_red:
            self._delete_fixup(x)
        nil.parent = nil

    def _delete_fixup(self, x: _Node) -> None:
        while x is not self.root and not x.red:
            p = x.parent
            if x is p.left:
                w = p.right
                if w.red:
                    w.red = BLACK
                    p.red = RED
                    self._rotate_left(p)
                    w = p.right
                if not w.left.red and not w.right.red:
                    w.red = RED
                    x = p
                else:
                    if not w.right.red:
                        w.left.red = BLACK
                        w.red = RED
                        self._rotate_right(w)
                        w = p.right
                    w.red = p.red
                    p.red = BLACK
                    w.right.red = BLACK
                    self._rotate_left(p)
                    x = self.root
            else:
                w = p.left
                if w.red:
                    w.red = BLACK
                    p.red = RED
                    self._rotate_right(p)
                    w = p.left
                if not w.right.red and not w.left.red:
                    w.red = RED
                    x = p
                else:
                    if not w.left.red:
                        w.right.red = BLACK
                        w.red = RED
                        self._rotate_left(w)
                        w = p.left
                    w.red = p.red
                    p.red = BLACK
                    w.left.red = BLACK
                    self._rotate_right(p)
                    x = self.root
        x.red = BLACK

    def items(self) -> Iterator[tuple]:
        nil = self.nil
        stack = []
        n = self.root
        while True:
            while n is not nil:
                stack.append(n)
                n = n.left
            if not stack:
                return
            n = stack.pop()
            yield (n.key, n.exp, n.payload)
            n = n.right

    def expired_keys(self, now) -> list:
        return [k for k, e, _ in self.items() if e <= now]

    def check(self) -> None:
        """Assert red-black colouring rules, BST order and parent links."""
        nil = self.nil
        assert not nil.red and not self.root.red, "root and sentinel must be black"

        def walk(n, lo, hi):
            if n is nil:
                return 1
            assert (lo is None or lo < n.key) and (hi is None or n.key < hi), "BST order"
            if n.red:
                assert not n.left.red and not n.right.red, f"red node {n.key!r} has a red child"
            for c in (n.left, n.right):
                if c is not nil:
                    assert c.parent is n, "broken parent link"
            bl = walk(n.left, lo, n.key)
            br = walk(n.right, n.key, hi)
            assert bl == br, f"black heights differ under {n.key!r}"
            return bl + (0 if n.red else 1)

        walk(self.root, None, None)
        assert sum(1 for _ in self.items()) == self._size
