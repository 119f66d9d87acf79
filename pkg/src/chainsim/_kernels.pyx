# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled scan over counter-based SplitMix64 draws.

Must stay bit-for-bit identical to ``chainsim._kernels_py``.
"""
from libc.stdint cimport uint64_t, int64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t MUL1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MUL2 = 0x94D049BB133111EBULL


cdef inline uint64_t _mix(uint64_t key, uint64_t counter) noexcept nogil:
    cdef uint64_t z = key + (counter + 1) * GOLDEN
    z = (z ^ (z >> 30)) * MUL1
    z = (z ^ (z >> 27)) * MUL2
    return z ^ (z >> 31)


def mix64(uint64_t key, uint64_t counter):
    return _mix(key, counter)


def first_below(uint64_t key, int64_t start, int64_t stop, uint64_t threshold):
    """Smallest counter in [start, stop) whose 53-bit draw is < threshold, or -1."""
    cdef int64_t i
    cdef int64_t found = -1
    if threshold == 0 or start >= stop:
        return -1
    with nogil:
        for i in range(start, stop):
            if (_mix(key, <uint64_t>i) >> 11) < threshold:
                found = i
                break
    return found


def count_below(uint64_t key, int64_t start, int64_t stop, uint64_t threshold):
    """Number of counters in [start, stop) whose 53-bit draw is < threshold."""
    cdef int64_t i
    cdef int64_t n = 0
    if threshold == 0 or start >= stop:
        return 0
    with nogil:
        for i in range(start, stop):
            if (_mix(key, <uint64_t>i) >> 11) < threshold:
                n += 1
    return n
