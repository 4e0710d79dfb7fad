"""Seeded, splittable random streams.

Each stream is numpy's Philox4x32-10 counter-based generator keyed by the
128-bit value ``seed + (stream_id << 64)`` with the counter starting at zero.
Uniform doubles come from ``Generator.random`` (53 random bits per draw) and
normal variates are produced with the Box-Muller transform on consecutive
uniform pairs, so the whole pipeline is reproducible from (seed, stream_id).
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


class Stream:
    """A deterministic random stream identified by ``(seed, stream_id)``."""

    def __init__(self, seed: int, stream_id: int = 0):
        seed = int(seed)
        stream_id = int(stream_id)
        if seed < 0 or stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative")
        self.seed = seed & _MASK64
        self.stream_id = stream_id & _MASK64
        key = self.seed + (self.stream_id << 64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def uniform(self, size=None) -> np.ndarray:
        """Uniform doubles in [0, 1)."""
        return self._gen.random(size)

    def normal(self, n: int) -> np.ndarray:
        """``n`` standard normal draws via Box-Muller."""
        pairs = (n + 1) // 2
        u = self._gen.random(2 * pairs).reshape(pairs, 2)
        u1 = 1.0 - u[:, 0]  # (0, 1], keeps log finite
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u[:, 1]
        z = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1).reshape(-1)
        return z[:n]

    def complex_normal(self, shape) -> np.ndarray:
        """Standard complex Gaussian entries (real and imaginary parts N(0, 1/2))."""
        shape = tuple(int(s) for s in np.atleast_1d(shape))
        n = int(np.prod(shape))
        z = self.normal(2 * n).reshape(n, 2)
        return ((z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0)).reshape(shape)

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in ``[low, high)``."""
        return int(self._gen.integers(low, high))

    def choice(self, options):
        return options[self.integers(0, len(options))]

    def spawn(self, child_id: int) -> "Stream":
        """Child stream derived from this one; deterministic in ``child_id``."""
        return Stream(self.seed, (self.stream_id * 1_000_003 + int(child_id) + 1) & _MASK64)


def prng_split(seed: int, stream_id: int) -> Stream:
    """Independent stream number ``stream_id`` of the family seeded by ``seed``."""
    return Stream(seed, stream_id)


def as_stream(seed) -> Stream:
    if isinstance(seed, Stream):
        return seed
    return Stream(int(seed), 0)
