"""Counter-based seeded random streams.

Each environment owns several independent streams keyed by (seed, stream id):
one for initial-state construction, one for observation noise, one for query
sampling.  Philox is counter-based, so streams with distinct ids are
statistically independent and a given (seed, stream, draw-sequence) triple
reproduces bit-identically across runs and platforms.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

from ..errors import ArgumentError


class Stream(IntEnum):
    """Well-known stream ids, one per environment subsystem."""

    INIT = 0
    NOISE = 1
    QUERY = 2


class SeededRng:
    """One deterministic random stream: (seed, stream_id) -> Philox generator."""

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array(
            [self.seed & 0xFFFFFFFFFFFFFFFF, self.stream_id & 0xFFFFFFFFFFFFFFFF],
            dtype=np.uint64,
        )
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def normal(self, mean: float = 0.0, sigma: float = 1.0, size=None):
        """Draw from N(mean, sigma^2); sigma == 0 returns mean exactly."""
        if sigma < 0:
            raise ArgumentError(f"sigma must be >= 0, got {sigma}")
        return self._gen.normal(loc=mean, scale=sigma, size=size)

    def uniform(self, lo: float = 0.0, hi: float = 1.0, size=None):
        """Uniform draw in [lo, hi); lo == hi returns lo."""
        if lo > hi:
            raise ArgumentError(f"uniform bounds out of order: lo={lo} > hi={hi}")
        if lo == hi:
            return lo if size is None else np.full(size, lo)
        return self._gen.uniform(lo, hi, size=size)

    def integers(self, lo: int, hi: int, size=None):
        """Integer draw in [lo, hi)."""
        if lo >= hi:
            raise ArgumentError(f"integer range empty: [{lo}, {hi})")
        return self._gen.integers(lo, hi, size=size)

    def choice_weighted(self, n: int, weights) -> int:
        """Draw one index from range(n) with the given probability weights."""
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (n,):
            raise ArgumentError("weights shape must match n")
        total = weights.sum()
        if not np.isfinite(total) or total <= 0:
            raise ArgumentError("weights must sum to a positive finite value")
        return int(self._gen.choice(n, p=weights / total))


def sample_gaussian(rng: SeededRng, mean: float, sigma: float) -> float:
    """One scalar draw from N(mean, sigma^2)."""
    return float(rng.normal(mean, sigma))


def sample_uniform(rng: SeededRng, lo: float, hi: float) -> float:
    """One scalar uniform draw in [lo, hi)."""
    return float(rng.uniform(lo, hi))
