"""Seeded random streams.

A :class:`RandomStream` wraps a PCG64 generator fed by a
:class:`numpy.random.SeedSequence`. PCG64 output is specified bit for bit,
so a given ``(seed, stream_id)`` yields the same draws on every platform.
"""

from __future__ import annotations

import numpy as np

_MAX_SEED = 2**64 - 1


class RandomStream:
    """Deterministic source of uniform, normal and Laplace variates.

    Parameters
    ----------
    seed : int
        Unsigned 64-bit seed.
    stream_id : int, optional
        Identifier of an independent substream. Streams with the same seed
        and different ids are statistically independent.
    """

    def __init__(self, seed: int, stream_id: int | None = None):
        seed = int(seed)
        if not 0 <= seed <= _MAX_SEED:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self.stream_id = stream_id
        spawn_key = () if stream_id is None else (int(stream_id),)
        seq = np.random.SeedSequence(seed, spawn_key=spawn_key)
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def substream(self, stream_id: int) -> "RandomStream":
        """Independent stream derived from this stream's seed."""
        if self.stream_id is not None:
            raise ValueError("substreams of substreams are not supported")
        return RandomStream(self.seed, stream_id)

    def random(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def laplace(self, size=None):
        """Laplace(0, 1) draws."""
        return self._gen.laplace(0.0, 1.0, size)

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"
