"""Deterministic random streams keyed by (master seed, node, purpose).

Every consumer of randomness gets its own stream, so no node's draws depend
on the order in which the engine schedules nodes.
"""
from __future__ import annotations

import hashlib
import math
from functools import cached_property

import numpy as np

from chainsim import kernels

_TWO53 = float(1 << 53)


def _stream_key(master_seed: int, node_id: int | None, purpose: str) -> int:
    if not 0 <= master_seed < 1 << 64:
        raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
    node = "*" if node_id is None else str(int(node_id))
    digest = hashlib.blake2b(
        f"{master_seed}/{node}/{purpose}".encode(), digest_size=8, person=b"chainsim"
    ).digest()
    return int.from_bytes(digest, "little")


def bernoulli_threshold(p: float) -> int:
    """Integer threshold t such that a 53-bit draw m satisfies m * 2**-53 < p iff m < t."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    return math.ceil(p * _TWO53)


class RngStream:
    """One independent pseudorandom stream.

    Two access patterns are offered. Indexed draws (:meth:`uniform_at`,
    :meth:`first_success`) are a pure function of the counter, which is how
    per-step mining draws are made. Sequential draws go through
    :attr:`generator`, a numpy ``Generator`` seeded from the same key.
    """

    def __init__(self, master_seed: int, node_id: int | None, purpose: str):
        self.master_seed = master_seed
        self.node_id = node_id
        self.purpose = purpose
        self.key = _stream_key(master_seed, node_id, purpose)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.master_seed}, node={self.node_id}, purpose={self.purpose!r})"

    @cached_property
    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.key))

    def random(self, size: int | None = None):
        return self.generator.random(size)

    def bits_at(self, counter: int) -> int:
        """53 uniformly distributed bits for ``counter``."""
        return kernels.mix64(self.key, counter) >> 11

    def uniform_at(self, counter: int) -> float:
        return self.bits_at(counter) / _TWO53

    def first_success(self, start: int, stop: int, threshold: int) -> int | None:
        """First counter in [start, stop) with ``bits_at(counter) < threshold``."""
        hit = kernels.first_below(self.key, start, stop, threshold)
        return None if hit < 0 else hit

    def count_successes(self, start: int, stop: int, threshold: int) -> int:
        return kernels.count_below(self.key, start, stop, threshold)


def derive_rng(master_seed: int, node_id: int | None, purpose: str) -> RngStream:
    """Stream for ``(master_seed, node_id, purpose)``; ``node_id=None`` for network-wide streams."""
    return RngStream(master_seed, node_id, purpose)
