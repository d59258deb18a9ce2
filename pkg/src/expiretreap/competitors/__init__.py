"""Conventional baselines: AVL, red-black and hash indexes plus a supporting heap."""

from expiretreap.competitors.avl import AvlTree
from expiretreap.competitors.hashindex import HashIndex
from expiretreap.competitors.heap import ExpiryHeap
from expiretreap.competitors.redblack import RedBlackTree
from expiretreap.competitors.strategy import EagerHeap, ExpiringIndex, PeriodicCleansing, strat_step

__all__ = [
    "AvlTree",
    "EagerHeap",
    "ExpiringIndex",
    "ExpiryHeap",
    "HashIndex",
    "PeriodicCleansing",
    "RedBlackTree",
    "strat_step",
]
