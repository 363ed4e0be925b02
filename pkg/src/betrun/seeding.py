"""Seed derivation and the SplitMix64 generator shared by both solver backends.

SplitMix64 (Steele, Lea & Flood 2014) is used both as the avalanche mixer for
deriving run seeds and as the solvers' internal PRNG, so the compiled and the
pure-Python kernels draw exactly the same random numbers.
"""

from __future__ import annotations

import hashlib

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MUL1 = 0xBF58476D1CE4E5B9
MIX_MUL2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 output finalizer (a bijection on 64-bit integers)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_MUL1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_MUL2) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, run_index: int) -> int:
    """Seed of Phase-1 run ``run_index`` under ``master_seed``.

    Equals the ``run_index``-th output of a SplitMix64 stream seeded with
    ``master_seed``; distinct indices give distinct seeds for a fixed master.
    """
    if run_index < 0:
        raise ValueError("run_index must be non-negative")
    return mix64(master_seed + (run_index + 1) * GOLDEN_GAMMA)


def stable_hash64(*parts: object) -> int:
    """Platform-independent 64-bit hash of the string forms of ``parts``."""
    data = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def cell_seed(master_seed: int, instance: str, strategy: str, repetition: int) -> int:
    """Master seed for one (instance, strategy, repetition) experiment cell."""
    return mix64((master_seed & MASK64) ^ stable_hash64(instance, strategy, repetition))


class SplitMix64:
    """Minimal SplitMix64 stream; mirrors the generator in the compiled core."""

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def below(self, n: int) -> int:
        """Uniform-ish integer in ``[0, n)`` for ``1 <= n < 2**32``."""
        return ((self.next() >> 32) * n) >> 32
