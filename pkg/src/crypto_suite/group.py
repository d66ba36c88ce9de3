"""
Prime-order groups.
Ed25519Group is the production backend (the prime-order subgroup of edwards25519,
arithmetic done by pycryptodome). SafePrimeGroup is the quadratic-residue subgroup of
Z*_q for a safe prime q = 2p + 1; tests use tiny instances of it to hit rare branches.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import Any

from Crypto.PublicKey import ECC
from Crypto.Signature import eddsa

from src.errors import DomainError
from .randomness import RandomSource

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GroupElement:
    group: "GroupParams"
    point: Any

    def encode(self) -> bytes:
        return self.group.encode(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.group.name == other.group.name and self.encode() == other.encode()

    def __hash__(self) -> int:
        return hash((self.group.name, self.encode()))

    def __repr__(self) -> str:
        return f"GroupElement({self.group.name}, {self.encode().hex()})"


class GroupParams(ABC):
    name: str
    order: int
    element_width: int

    @abstractmethod
    def _generator_point(self) -> Any:
        ...

    @abstractmethod
    def _power(self, point: Any, exponent: int) -> Any:
        ...

    @abstractmethod
    def _encode_point(self, point: Any) -> bytes:
        ...

    @abstractmethod
    def _decode_point(self, data: bytes) -> Any:
        ...

    @property
    def generator(self) -> GroupElement:
        return GroupElement(self, self._generator_point())

    def exp(self, base: GroupElement, exponent: int) -> GroupElement:
        """Raw exponentiation; protocol code goes through primitives.group_exp."""
        if base.group is not self and base.group.name != self.name:
            raise DomainError("element belongs to another group")
        return GroupElement(self, self._power(base.point, exponent % self.order))

    def encode(self, element: GroupElement) -> bytes:
        return self._encode_point(element.point)

    def decode(self, data: bytes) -> GroupElement:
        if len(data) != self.element_width:
            raise DomainError(f"{self.name} elements are {self.element_width} bytes")
        return GroupElement(self, self._decode_point(bytes(data)))

    def random_element(self, rng: RandomSource) -> GroupElement:
        return GroupElement(self, self._power(self._generator_point(), rng.randbelow(self.order)))


# edwards25519 constants (RFC 8032)
_ED_L = 2 ** 252 + 27742317777372353535851937790883648493
_ED_GX = 15112221349535400772501151409588531511454012693041857206046113283949847762202
_ED_GY = 46316835694926478169428394003475163141307993866256225615783033603165251855960
_ED_IDENTITY = (1).to_bytes(32, "little")


def _is_identity(point) -> bool:
    return int(point.x) == 0 and int(point.y) == 1


class Ed25519Group(GroupParams):
    name = "ed25519"
    order = _ED_L
    element_width = 32

    def __init__(self):
        self._base = ECC.EccPoint(_ED_GX, _ED_GY, curve="Ed25519")
        self._identity = ECC.EccPoint(0, 1, curve="Ed25519")

    def _generator_point(self):
        return self._base

    def _power(self, point, exponent: int):
        return point * exponent

    def _encode_point(self, point) -> bytes:
        if _is_identity(point):
            return _ED_IDENTITY
        key = ECC.construct(curve="Ed25519", point_x=int(point.x), point_y=int(point.y))
        return key.export_key(format="raw")

    def _decode_point(self, data: bytes):
        if data == _ED_IDENTITY:
            return self._identity
        try:
            point = eddsa.import_public_key(data).pointQ
        except ValueError as exc:
            raise DomainError(f"not an edwards25519 point: {exc}") from exc
        # re-export catches a set sign bit on x = 0
        if self._encode_point(point) != data:
            raise DomainError("non-canonical ed25519 encoding")
        if not _is_identity(point * _ED_L):
            raise DomainError("point is outside the prime-order subgroup")
        return point


class SafePrimeGroup(GroupParams):
    """Squares mod a safe prime q = 2p + 1; generator 4, elements big-endian in width(q) bytes."""

    def __init__(self, modulus: int, name: str = None):
        if modulus < 7 or modulus % 2 == 0:
            raise DomainError("safe-prime modulus must be an odd prime >= 7")
        self.modulus = modulus
        self.order = (modulus - 1) // 2
        self.element_width = (modulus.bit_length() + 7) // 8
        self.name = name or f"modp-{modulus}"

    def _generator_point(self) -> int:
        return 4

    def _power(self, point: int, exponent: int) -> int:
        return pow(point, exponent, self.modulus)

    def _encode_point(self, point: int) -> bytes:
        return point.to_bytes(self.element_width, "big")

    def _decode_point(self, data: bytes) -> int:
        value = int.from_bytes(data, "big")
        if not 1 <= value < self.modulus or pow(value, self.order, self.modulus) != 1:
            raise DomainError(f"{value} is not in the order-{self.order} subgroup")
        return value


TOY_MODULUS = 2039      # 2 * 1019 + 1


@lru_cache(maxsize=None)
def get_group(name: str) -> GroupParams:
    if name == "ed25519":
        return Ed25519Group()
    if name == "modp-toy":
        logger.warning("Using the toy safe-prime group; this configuration offers no security")
        return SafePrimeGroup(TOY_MODULUS, name="modp-toy")
    if name.startswith("modp-"):
        return SafePrimeGroup(int(name[len("modp-"):]))
    raise DomainError(f"unknown group {name!r}")
