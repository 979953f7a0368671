"""Stream-indexed deterministic random number generation.

Every stochastic routine in the package takes a :class:`RandomStream`
instead of a bare seed.  A stream is a (root_seed, stream_index) pair
mapped onto a counter-based Philox generator, so distinct indices give
statistically independent streams and the same pair always reproduces
the same draws bit for bit.  Parallel work is partitioned by assigning
each shard its own stream index, never by splitting one stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = 1 << 64


@dataclass(frozen=True)
class RandomStream:
    """Reproducible, independent random stream addressed by (seed, index)."""

    root_seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        if not 0 <= int(self.root_seed) < _U64:
            raise ValueError(f"root_seed must be a 64-bit unsigned integer, got {self.root_seed}")
        if not 0 <= int(self.stream_index) < _U64:
            raise ValueError(f"stream_index must be a 64-bit unsigned integer, got {self.stream_index}")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = (int(self.root_seed) << 64) | int(self.stream_index)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, offset: int) -> "RandomStream":
        """Stream at index ``stream_index + offset`` under the same root seed."""
        return RandomStream(self.root_seed, self.stream_index + offset)
