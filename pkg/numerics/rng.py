"""
Seeded random streams.

Every consumer asks for its own stream by purpose tag, so adding a new
consumer never shifts the draws another one sees. Streams are numpy PCG64
generators keyed by (seed, purpose); reproducible within this implementation,
no promise across implementations.
"""

import hashlib
from typing import Optional, Sequence

import numpy as np

DEFAULT_SEED = 42


def _purpose_key(purpose: str) -> int:
    digest = hashlib.sha256(purpose.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


class Rng:
    """
    A named, seedable random stream.

    Args:
        seed: 64-bit seed shared by every stream of one run
        purpose: Tag identifying the consumer ("init", "train/shuffle", ...)
    """

    def __init__(self, seed: int = DEFAULT_SEED, purpose: str = "root"):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.purpose = purpose
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(_purpose_key(purpose),))
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def derive(self, purpose: str) -> "Rng":
        """Return an independent stream for a sub-purpose of this one."""
        return Rng(self.seed, f"{self.purpose}/{purpose}")

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def uniform(self, low: float, high: float, size=None) -> np.ndarray:
        return self._generator.uniform(low, high, size)

    def random(self, size=None) -> np.ndarray:
        return self._generator.random(size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None) -> np.ndarray:
        return self._generator.normal(loc, scale, size)

    def integers(self, low: int, high: Optional[int] = None, size=None) -> np.ndarray:
        return self._generator.integers(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)

    def choice(self, values: Sequence, size=None, replace: bool = True):
        return self._generator.choice(values, size=size, replace=replace)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, purpose={self.purpose!r})"
