"""Seeded random streams.

Every stream is a Philox4x64 counter-based generator keyed by a
:class:`numpy.random.SeedSequence`.  A stream is identified by a root seed and
a *substream path* (a tuple of non-negative integers); the path becomes the
``spawn_key`` of the seed sequence, so ``Stream(seed, (i,))`` is the same
generator no matter which process or thread builds it.

Uniforms are taken from the raw 64-bit output: the top 53 bits ``k`` of each
word map to ``(k + 0.5) / 2**53``, which lies strictly inside (0, 1).  Each
uniform consumes exactly one raw word, so the stream position after ``n``
uniforms is always ``n`` words regardless of how the calls were split up.
Normal variates are produced by the inverse CDF, one uniform per normal.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.special import ndtri

_INV_2_53 = 2.0 ** -53


class Stream:
    """A reproducible stream of uniforms and normals."""

    def __init__(self, seed: int, path: Sequence[int] = ()):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self._bitgen = np.random.Philox(seq)
        self.consumed = 0

    def __repr__(self) -> str:
        return f"Stream(seed={self.seed}, path={self.path}, consumed={self.consumed})"

    def substream(self, index: int) -> "Stream":
        """Independent child stream; depends only on (seed, path, index)."""
        return Stream(self.seed, self.path + (int(index),))

    def uniforms(self, n: int) -> np.ndarray:
        raw = self._bitgen.random_raw(int(n))
        self.consumed += int(n)
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def normals(self, n: int, mu: float = 0.0, sigma: float = 1.0) -> np.ndarray:
        return mu + sigma * ndtri(self.uniforms(n))
