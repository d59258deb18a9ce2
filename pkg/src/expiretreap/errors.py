"""Exception types shared across the package."""

from __future__ import annotations


class TreapError(Exception):
    pass


class KeyNotFound(TreapError, KeyError):
    """Raised when a lookup or removal names a key that is not stored."""

    def __init__(self, key):
        super().__init__(key)
        self.key = key

    def __str__(self) -> str:
        return f"key {self.key!r} is not in the index"


class InvalidRange(TreapError, ValueError):
    pass


class RangeUnsupported(TreapError):
    """Range scans are meaningless once keys have been scrambled by hashing."""


class InvariantViolation(TreapError, AssertionError):
    pass


class AlreadyExpired(TreapError, ValueError):
    pass


class UndefinedRoE(TreapError, ZeroDivisionError):
    pass


class ConfigError(TreapError, ValueError):
    pass
