"""
Randomness sources.
Every randomized operation takes a RandomSource so a whole run can be replayed from a seed.
"""

import threading
from abc import ABC, abstractmethod
from typing import Union

from Crypto.Hash import SHAKE256
from Crypto.Random import get_random_bytes
from Crypto.Random.random import StrongRandom


class RandomSource(ABC):
    """Byte source with the integer helpers the protocol needs."""

    @abstractmethod
    def read(self, n: int) -> bytes:
        ...

    def randbelow(self, bound: int) -> int:
        """Uniform integer in [0, bound)."""
        return self.randrange(0, bound)

    def randrange(self, low: int, high: int) -> int:
        """Uniform integer in [low, high), drawn from this source's bytes."""
        if high <= low:
            raise ValueError("empty range")
        return StrongRandom(randfunc=self.read).randrange(low, high)


class SystemRandomSource(RandomSource):
    def read(self, n: int) -> bytes:
        return get_random_bytes(n)


class SeededRandomSource(RandomSource):
    """Deterministic stream: SHAKE256 over the label and seed, read incrementally."""

    def __init__(self, seed: Union[int, bytes, str], label: bytes = b"ace/rng"):
        if isinstance(seed, int):
            seed = str(seed).encode("ascii")
        elif isinstance(seed, str):
            seed = seed.encode("utf-8")
        self._xof = SHAKE256.new(label + b"\x00" + seed)
        self._lock = threading.Lock()

    def read(self, n: int) -> bytes:
        with self._lock:
            return self._xof.read(n)


def make_random_source(seed=None) -> RandomSource:
    """Seeded stream when a seed is given, OS randomness otherwise."""
    if seed is None:
        return SystemRandomSource()
    return SeededRandomSource(seed)
