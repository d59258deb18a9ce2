"""Persistent treaps for managing short-lived, expiring data."""

from expiretreap.errors import (
    AlreadyExpired,
    ConfigError,
    InvalidRange,
    InvariantViolation,
    KeyNotFound,
    RangeUnsupported,
    TreapError,
    UndefinedRoE,
)
from expiretreap.treap import INFINITY, Record, TreapSnapshot, build, empty, validate

__version__ = "0.1.0"
