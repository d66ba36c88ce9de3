"""
RSA trapdoor permutation over M = [0, n).
Forward is x^e mod n and is public; inverse uses the CRT with the secret factors.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

from Crypto.PublicKey import RSA

from src.config import DEFAULT_PERM_BITS, MIN_SECURITY_BITS
from src.errors import DomainError
from .instrumentation import record
from .models import PermDomainValue, domain_width
from .randomness import RandomSource, SystemRandomSource

logger = logging.getLogger(__name__)

PUBLIC_EXPONENT = 65537


@dataclass(frozen=True)
class PermPublicKey:
    modulus: int
    exponent: int = PUBLIC_EXPONENT

    @property
    def width(self) -> int:
        return domain_width(self.modulus)


@dataclass(frozen=True, repr=False)
class PermSecretKey:
    modulus: int
    exponent: int
    p: int
    q: int

    @cached_property
    def _crt(self):
        return (self.exponent % (self.p - 1), self.exponent % (self.q - 1), pow(self.q, -1, self.p))

    def __repr__(self) -> str:
        return f"PermSecretKey(<{self.modulus.bit_length()}-bit>)"


@dataclass(frozen=True)
class PermKeyPair:
    public: PermPublicKey
    secret: PermSecretKey

    @property
    def modulus(self) -> int:
        return self.public.modulus


def perm_keygen(security_bits: int = MIN_SECURITY_BITS, rng: Optional[RandomSource] = None,
                modulus_bits: int = DEFAULT_PERM_BITS) -> PermKeyPair:
    if security_bits < MIN_SECURITY_BITS:
        raise DomainError(f"security must be at least {MIN_SECURITY_BITS} bits")
    rng = rng or SystemRandomSource()
    logger.info(f"Generating {modulus_bits}-bit permutation key")
    key = RSA.generate(modulus_bits, randfunc=rng.read, e=PUBLIC_EXPONENT)
    return keypair_from_factors(int(key.p), int(key.q), int(key.e))


def keypair_from_factors(p: int, q: int, e: int = PUBLIC_EXPONENT) -> PermKeyPair:
    n = p * q
    d = pow(e, -1, (p - 1) * (q - 1))
    return PermKeyPair(PermPublicKey(n, e), PermSecretKey(n, d, p, q))


def _check(modulus: int, x: PermDomainValue) -> None:
    if x.modulus != modulus:
        raise DomainError("value belongs to another permutation domain")


def perm_forward(pk: PermPublicKey, x: PermDomainValue) -> PermDomainValue:
    _check(pk.modulus, x)
    record("perm_forwards")
    return PermDomainValue(pow(x.value, pk.exponent, pk.modulus), pk.modulus)


def perm_inverse(sk: PermSecretKey, x: PermDomainValue) -> PermDomainValue:
    _check(sk.modulus, x)
    record("perm_inverses")
    dp, dq, qinv = sk._crt
    m1 = pow(x.value % sk.p, dp, sk.p)
    m2 = pow(x.value % sk.q, dq, sk.q)
    h = (qinv * (m1 - m2)) % sk.p
    return PermDomainValue(m2 + h * sk.q, sk.modulus)


def sample_chain_origin(pk: PermPublicKey, rng: RandomSource) -> PermDomainValue:
    """Fresh ST_0, uniform over {2, ..., n-1}."""
    return PermDomainValue(rng.randrange(2, pk.modulus), pk.modulus)
