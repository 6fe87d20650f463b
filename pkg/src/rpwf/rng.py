"""Deterministic random-stream derivation.

Every stochastic routine in the package draws from a ``numpy`` PCG64
generator obtained from a master seed, a component label and a replica
index.  The triple is hashed into a ``SeedSequence`` so that

* the same triple always yields the same stream, on any platform,
* distinct labels or indices yield statistically independent streams,
* ensembles can hand replica ``i`` its own stream without coordination.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_U64 = (1 << 64) - 1


def seed_sequence(seed: int, label: str = "main", index: int = 0) -> np.random.SeedSequence:
    digest = hashlib.sha256(f"{label}\x1f{index}".encode()).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.SeedSequence([int(seed) & _U64, *words, int(index)])


def generator(seed: int, label: str = "main", index: int = 0) -> np.random.Generator:
    """PCG64 generator for the (seed, label, index) stream."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, label, index)))


@dataclass(frozen=True)
class StreamKey:
    """Record of which stream produced a stochastic artifact."""

    seed: int
    label: str = "main"
    index: int = 0

    def generator(self) -> np.random.Generator:
        return generator(self.seed, self.label, self.index)

    def with_index(self, index: int) -> "StreamKey":
        return StreamKey(self.seed, self.label, index)

    def as_dict(self) -> dict:
        return {"seed": self.seed, "label": self.label, "index": self.index}
