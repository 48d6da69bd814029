"""Keyed, order-independent random substreams.

Every random decision in the toolkit draws from a counter-based generator
derived from (seed, *key parts), so a result never depends on iteration
order, worker count, or scheduling. Python's built-in hash() is salted per
process, so string parts are folded in with 64-bit FNV-1a instead.
"""

from __future__ import annotations

import numpy as np

_FNV_OFFSET64 = 0xCBF29CE484222325
_FNV_PRIME64 = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET64
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME64) & _MASK64
    return h


def _part_to_int(part: int | str) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & _MASK64
    if isinstance(part, str):
        return _fnv1a64(part.encode("utf-8"))
    raise TypeError(f"substream key parts must be int or str, got {type(part).__name__}")


def substream(seed: int, *parts: int | str) -> np.random.Generator:
    """A Philox generator keyed by (seed, *parts); same key, same stream."""
    entropy = [int(seed) & _MASK64] + [_part_to_int(p) for p in parts]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
