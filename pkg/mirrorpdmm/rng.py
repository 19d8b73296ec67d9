"""Seeded pseudo-random streams pinned by algorithm, not by library.

Every instance the harness generates (graphs, cost vectors) comes from the
generators below, so another implementation following ``docs/prng.md`` can
rebuild identical instances bit for bit.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

_JUMP = (0x180EC6D33CFD0ABA, 0xD5A61266F0C9392C, 0xA9582618E03FC9AA, 0x39ABDC4529B1661C)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


class Xoshiro256StarStar:
    """xoshiro256** with state filled from SplitMix64(seed)."""

    __slots__ = ("s",)

    def __init__(self, seed: int) -> None:
        mixer = SplitMix64(seed)
        self.s = [mixer.next() for _ in range(4)]

    def next(self) -> int:
        s0, s1, s2, s3 = self.s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return result

    def jump(self) -> Xoshiro256StarStar:
        """Advance by 2**128 draws in place; returns self."""
        acc = [0, 0, 0, 0]
        for word in _JUMP:
            for b in range(64):
                if word & (1 << b):
                    acc = [a ^ s for a, s in zip(acc, self.s)]
                self.next()
        self.s = acc
        return self

    def random_raw(self, size: int) -> np.ndarray:
        s0, s1, s2, s3 = self.s
        out = [0] * size
        for k in range(size):
            out[k] = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
            t = (s1 << 17) & MASK64
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
        self.s = [s0, s1, s2, s3]
        return np.array(out, dtype=np.uint64)

    def uniform(self, size: int) -> np.ndarray:
        """Doubles in [0, 1) from the top 53 bits of each draw."""
        raw = self.random_raw(size)
        return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def standard_normal(self, size: int) -> np.ndarray:
        """Box-Muller on consecutive uniform pairs (u1, u2).

        Pair k yields ``r*cos(2*pi*u2)`` then ``r*sin(2*pi*u2)`` with
        ``r = sqrt(-2*ln(1 - u1))``; an odd ``size`` drops the last sine.
        """
        pairs = (size + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        angle = 2.0 * np.pi * u[:, 1]
        z = np.empty((pairs, 2), dtype=np.float64)
        z[:, 0] = radius * np.cos(angle)
        z[:, 1] = radius * np.sin(angle)
        return z.reshape(-1)[:size]


def make_generator(seed: int, stream: int = 0) -> Xoshiro256StarStar:
    """Generator for ``seed`` advanced by ``stream`` jumps."""
    generator = Xoshiro256StarStar(seed)
    for _ in range(stream):
        generator.jump()
    return generator
