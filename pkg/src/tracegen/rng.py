"""Seeded randomness: a Philox counter-based generator read in blocks."""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

DEFAULT_SEED = 42
_BLOCK = 4096


class RandomSource:
    """Uniform doubles in ``[0, 1)`` from ``numpy``'s Philox generator.

    Draws are pulled from a pre-generated block so the per-draw cost in the
    recursive samplers stays a list lookup.
    """

    def __init__(self, seed: int = DEFAULT_SEED):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.Philox(self.seed & ((1 << 64) - 1)))
        self._buf: list[float] = []
        self._pos = 0

    def random(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._gen.random(_BLOCK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def bernoulli(self, r: float) -> int:
        return 1 if self.random() < r else 0

    def geometric(self, r: float) -> int:
        return sample_geometric(r, self)

    def spawn(self, key: int) -> RandomSource:
        """An independent source derived from this seed and ``key``."""
        seq = np.random.SeedSequence([self.seed & ((1 << 64) - 1), key])
        return RandomSource(int(seq.generate_state(1, dtype=np.uint64)[0]))


def sample_geometric(r: float, rng: RandomSource) -> int:
    """``K >= 0`` with ``P(K = k) = (1 - r) r^k``, by inversion."""
    if not 0 <= r < 1:
        raise DomainError(f"geometric parameter must lie in [0, 1), got {r}")
    if r == 0:
        return 0
    return int(math.log1p(-rng.random()) / math.log(r))
