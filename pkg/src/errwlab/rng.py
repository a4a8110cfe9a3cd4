"""Reproducible random streams for simulation runs.

Every run owns an independent xoshiro256** stream.  The per-run seed is
derived from ``(master_seed, run_index)`` with the splitmix64 avalanche,
so batches can be executed in any order (or in parallel) and still
produce identical results.  The integer stream is exactly reproducible;
uniform doubles are ``(u64 >> 11) * 2**-53`` and exponentials come from
the inverse CDF, so the float sequences are reproducible as well.

This module is the pure-python side; the numba kernels reimplement the
same generator and the test suite checks both sides draw identical
streams.
"""

from __future__ import annotations

import math

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
TWO_NEG53 = 2.0 ** -53


def mix64(z: int) -> int:
    """splitmix64 finalizer: a 64-bit avalanche permutation."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_seed(master_seed: int, run_index: int) -> int:
    """64-bit seed of the stream owned by run ``run_index`` of a batch."""
    return mix64((master_seed + GOLDEN_GAMMA * (run_index + 1)) & MASK64)


def xoshiro_init(seed: int) -> tuple[int, int, int, int]:
    """Expand a 64-bit seed into a xoshiro256** state via splitmix64."""
    state = seed & MASK64
    out = []
    for _ in range(4):
        state = (state + GOLDEN_GAMMA) & MASK64
        out.append(mix64(state))
    if not any(out):
        out[0] = 1  # the all-zero state is a fixed point of xoshiro
    return tuple(out)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256StarStar:
    """xoshiro256** generator, mirroring the njit kernels bit for bit."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, seed: int):
        self.s0, self.s1, self.s2, self.s3 = xoshiro_init(seed)

    @classmethod
    def for_run(cls, master_seed: int, run_index: int) -> "Xoshiro256StarStar":
        return cls(stream_seed(master_seed, run_index))

    def next_u64(self) -> int:
        result = (_rotl((self.s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (self.s1 << 17) & MASK64
        self.s2 ^= self.s0
        self.s3 ^= self.s1
        self.s1 ^= self.s2
        self.s0 ^= self.s3
        self.s2 ^= t
        self.s3 = _rotl(self.s3, 45)
        return result

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * TWO_NEG53

    def exponential(self) -> float:
        """Unit-rate exponential via the inverse CDF."""
        return -math.log1p(-self.uniform())

    def state(self) -> tuple[int, int, int, int]:
        return (self.s0, self.s1, self.s2, self.s3)
