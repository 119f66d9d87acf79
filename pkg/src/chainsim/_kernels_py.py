"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``."""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MUL1 = 0xBF58476D1CE4E5B9
MUL2 = 0x94D049BB133111EB

_FIRST_CHUNK = 1 << 12
_CHUNK = 1 << 18


def mix64(key: int, counter: int) -> int:
    z = (key + (counter + 1) * GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * MUL1) & MASK64
    z = ((z ^ (z >> 27)) * MUL2) & MASK64
    return z ^ (z >> 31)


def _mix_block(key: int, start: int, stop: int) -> np.ndarray:
    # uint64 arithmetic in numpy wraps modulo 2**64, same as C
    c = np.arange(start + 1, stop + 1, dtype=np.uint64)
    z = np.uint64(key) + c * np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MUL1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MUL2)
    return z ^ (z >> np.uint64(31))


def first_below(key: int, start: int, stop: int, threshold: int) -> int:
    if threshold == 0 or start >= stop:
        return -1
    thr = np.uint64(threshold)
    lo = start
    # hits are usually a few thousand draws away; grow the window from small
    chunk = _FIRST_CHUNK
    while lo < stop:
        hi = min(stop, lo + chunk)
        hits = np.flatnonzero((_mix_block(key, lo, hi) >> np.uint64(11)) < thr)
        if hits.size:
            return lo + int(hits[0])
        lo = hi
        chunk = min(chunk * 2, _CHUNK)
    return -1


def count_below(key: int, start: int, stop: int, threshold: int) -> int:
    if threshold == 0 or start >= stop:
        return 0
    thr = np.uint64(threshold)
    n = 0
    lo = start
    while lo < stop:
        hi = min(stop, lo + _CHUNK)
        n += int(np.count_nonzero((_mix_block(key, lo, hi) >> np.uint64(11)) < thr))
        lo = hi
    return n


def first_below_scalar(key: int, start: int, stop: int, threshold: int) -> int:
    """Reference scan, one draw at a time. Slow; used for cross-checks."""
    for i in range(start, stop):
        if (mix64(key, i) >> 11) < threshold:
            return i
    return -1
