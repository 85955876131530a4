"""Deterministic 64-bit random generator used by every sampler in the package.

The generator is SplitMix64 (Steele, Lea and Flood's mixing constants), chosen
because its update is a handful of documented integer constants and therefore
reproduces bit-for-bit in any language:

    state   <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z       <- state
    z       <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9  mod 2^64
    z       <- (z xor (z >> 27)) * 0x94D049BB133111EB  mod 2^64
    output  <- z xor (z >> 31)

Floats take the top 53 bits of an output word, so ``uniform`` is exact binary
arithmetic.  Integer draws use plain modulo reduction; the tiny modulo bias is
irrelevant for test-instance generation and keeps the reduction portable.

Independent child streams are derived with ``derive_seed``, which folds string
labels (hashed with FNV-1a 64) and integers into the root seed one SplitMix64
scramble at a time.  Reports quote the generator name so a rerun elsewhere can
reproduce the exact byte stream.
"""

from __future__ import annotations

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

GENERATOR_NAME = "splitmix64"


def _scramble(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
    return z ^ (z >> 31)


def _fnv1a64(text: str) -> int:
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def derive_seed(root: int, *labels: int | str) -> int:
    """Fold labels into ``root`` to obtain an independent child seed."""
    seed = root & _MASK64
    for label in labels:
        word = _fnv1a64(label) if isinstance(label, str) else (label & _MASK64)
        seed = _scramble(seed ^ word)
    return seed


class SplitMix64:
    """Tiny deterministic RNG; one 64-bit word of state."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN_GAMMA) & _MASK64
        return _scramble(self._state)

    def uniform(self, lo: float = -1.0, hi: float = 1.0) -> float:
        """Uniform float in [lo, hi) with 53-bit resolution."""
        u = self.next_u64() >> 11
        return lo + (hi - lo) * (u * (1.0 / (1 << 53)))

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the inclusive range [lo, hi]."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)

    def chance(self, p: float) -> bool:
        return self.uniform(0.0, 1.0) < p

    def choice(self, seq):
        if not seq:
            raise ValueError("cannot choose from an empty sequence")
        return seq[self.randint(0, len(seq) - 1)]

    def sample(self, seq, k: int) -> list:
        """k distinct items, partial Fisher-Yates; order is part of the draw."""
        if k > len(seq):
            raise ValueError(f"cannot sample {k} items from {len(seq)}")
        pool = list(seq)
        picked = []
        for _ in range(k):
            idx = self.randint(0, len(pool) - 1)
            picked.append(pool.pop(idx))
        return picked

    def subset(self, seq, allow_empty: bool = True) -> list:
        """Random subset of ``seq``, kept in the original order."""
        while True:
            kept = [item for item in seq if self.chance(0.5)]
            if kept or allow_empty:
                return kept
