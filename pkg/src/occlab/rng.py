"""Deterministic randomness for the simulator and the experiment layer.

Two tiers:

* ``SplitMix64``: the in-kernel generator. Both simulation backends (pure
  Python and compiled) implement the identical update, so miss/eviction
  sequences are bit-reproducible across backends. Separate streams are keyed
  per concern (prefill addresses, skew picks, global-eviction victims,
  replacement policy) so that consuming randomness in one path cannot shift
  another; that independence is what makes some invariants exact rather
  than statistical.

* numpy ``Generator`` objects derived by name for the Python-side experiment
  code (plaintexts, trial shuffles, region offsets).

Everything flows from one master seed; nothing reads OS entropy.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# Kernel stream tags. Keep in sync with both engine backends.
STREAM_PREFILL = 1
STREAM_SKEW = 2
STREAM_GLE = 3
STREAM_POLICY = 4


class SplitMix64:
    """Vigna's splitmix64; tiny state, good enough statistics, trivially portable."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def bounded(self, n: int) -> int:
        """Uniform-ish draw in [0, n) via 128-bit multiply-shift.

        The slight modulo bias of the multiply-shift is < n / 2^64 and
        irrelevant at simulation scales; what matters is that the compiled
        backend computes the identical value with a __uint128 multiply.
        """
        return (self.next_u64() * n) >> 64


def stream_seed(master_seed: int, tag: int) -> int:
    """Seed for one named kernel stream."""
    return (master_seed ^ (tag * GOLDEN)) & MASK64


def kernel_streams(master_seed: int) -> dict[int, int]:
    return {t: stream_seed(master_seed, t)
            for t in (STREAM_PREFILL, STREAM_SKEW, STREAM_GLE, STREAM_POLICY)}


def derive(master_seed: int, name: str, index: int = 0) -> int:
    """Collision-resistant 64-bit sub-seed for a named component."""
    h = hashlib.blake2b(digest_size=8)
    h.update(master_seed.to_bytes(16, "little", signed=False))
    h.update(name.encode())
    h.update(index.to_bytes(8, "little", signed=False))
    return int.from_bytes(h.digest(), "little")


def generator(master_seed: int, name: str, index: int = 0) -> np.random.Generator:
    """numpy Generator for Python-side experiment code."""
    return np.random.Generator(np.random.PCG64(derive(master_seed, name, index)))
