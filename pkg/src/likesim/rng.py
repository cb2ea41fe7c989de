"""Deterministic random number generation.

Everything stochastic in this package flows through SplitMix64 so that a
sample is reproducible from its 64-bit seed alone, independent of numpy
version, platform, or scheduling.  The exact bit-level contract:

  mix64(z):   z ^= z >> 30;  z *= 0xBF58476D1CE4B5B9  (mod 2^64)
              z ^= z >> 27;  z *= 0x94D049BB133111EB  (mod 2^64)
              z ^= z >> 31
  stream:     state += 0x9E3779B97F4A7C15 (mod 2^64); output mix64(state)
  uniform:    (u64 >> 11) * 2^-53, a double in [0, 1)
  randbelow:  u64 % n  (modulo bias < 2^-50 for the n used here)

Per-sample seeds derive from (base_seed, sample_id) as

  sample_seed = mix64(base_seed XOR (sample_id * 0x9E3779B97F4A7C15 mod 2^64))

which is injective in sample_id over [0, 2^64) for fixed base_seed, because
multiplication by an odd constant, XOR with a constant, and mix64 are all
bijections on 64-bit words.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    z &= _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4B5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def derive_sample_seed(base_seed: int, sample_id: int) -> int:
    """Derive the per-sample 64-bit seed from the experiment base seed."""
    return mix64((base_seed ^ ((sample_id * _GOLDEN) & _MASK64)) & _MASK64)


class SplitMix64:
    """Minimal SplitMix64 stream; state advances by the golden gamma."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random mantissa bits."""
        return (self.next_u64() >> 11) * 1.1102230246251565e-16  # 2**-53

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return self.next_u64() % n
