"""
Value types of the crypto suite: scalars, permutation-domain values and symmetric keys.
"""

from dataclasses import dataclass
from typing import ClassVar

from src.config import (
    CIPHER_KEY_WIDTH, HASH_KEY_WIDTH, PRF_KEY_WIDTH, SCALAR_PRF_KEY_WIDTH, SCALAR_WIDTH,
)
from src.errors import DomainError
from .randomness import RandomSource


@dataclass(frozen=True)
class Scalar:
    """Nonzero residue mod the group order (an element of Z*_p)."""
    value: int
    order: int

    def __post_init__(self):
        if not 1 <= self.value < self.order:
            raise DomainError("scalar must lie in Z*_p")

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(SCALAR_WIDTH, "big")

    @classmethod
    def from_bytes(cls, data: bytes, order: int) -> "Scalar":
        if len(data) != SCALAR_WIDTH:
            raise DomainError(f"scalar encoding must be {SCALAR_WIDTH} bytes")
        return cls(int.from_bytes(data, "big"), order)


@dataclass(frozen=True)
class PermDomainValue:
    """Point of the trapdoor-permutation domain M = [0, modulus)."""
    value: int
    modulus: int

    def __post_init__(self):
        if not 0 <= self.value < self.modulus:
            raise DomainError("value outside the permutation domain")

    @property
    def width(self) -> int:
        return domain_width(self.modulus)

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(self.width, "big")

    @classmethod
    def from_bytes(cls, data: bytes, modulus: int) -> "PermDomainValue":
        if len(data) != domain_width(modulus):
            raise DomainError("permutation-domain encoding has the wrong width")
        return cls(int.from_bytes(data, "big"), modulus)


def domain_width(modulus: int) -> int:
    return (modulus.bit_length() + 7) // 8


@dataclass(frozen=True, repr=False)
class SymmetricKey:
    material: bytes
    WIDTH: ClassVar[int] = 0

    def __post_init__(self):
        if len(self.material) != self.WIDTH:
            raise DomainError(f"{type(self).__name__} must be {self.WIDTH} bytes")

    def __repr__(self) -> str:
        return f"{type(self).__name__}(<{self.WIDTH} bytes>)"

    @classmethod
    def generate(cls, rng: RandomSource):
        return cls(rng.read(cls.WIDTH))


class PrfKey(SymmetricKey):
    """Key of F (AES-128-CMAC)."""
    WIDTH = PRF_KEY_WIDTH


class ScalarPrfKey(SymmetricKey):
    """Key of F_p (HMAC-SHA-512 reduced mod p)."""
    WIDTH = SCALAR_PRF_KEY_WIDTH


class HashKey(SymmetricKey):
    """Key of H (HMAC-SHA-256 over a group element)."""
    WIDTH = HASH_KEY_WIDTH


class CipherKey(SymmetricKey):
    """Per-keyword AES-128-GCM key K_w."""
    WIDTH = CIPHER_KEY_WIDTH
