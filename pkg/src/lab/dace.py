"""
Instance generator and verifier for the decisional problem behind the deltas.

For each row i: a random a_i and a fresh chain origin b'_0; for each column j a random
c_ij, b'_ij = inverse permutation of b'_i(j-1), b_ij = b'_ij mod p, I_ij = g^(b_ij a_i),
and F_ij = g^(b_ij a_i / c_ij) in the real case (v = 0) or a uniform element (v = 1).
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

from src.config import MIN_SECURITY_BITS
from src.crypto_suite import (
    GroupElement, PermKeyPair, SeededRandomSource, get_group, perm_inverse, perm_keygen,
    sample_chain_origin,
)
from src.errors import DAceRegenerateFault

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DAceInstance:
    m: int
    n: int
    v: int
    a: List[int]
    b: List[List[int]]
    c: List[List[int]]
    I: List[List[GroupElement]]
    F: List[List[GroupElement]]

    def challenge(self):
        """What the distinguisher sees: g, g^a_i, b_ij and F_ij."""
        group = self.F[0][0].group
        g = group.generator
        return g, [group.exp(g, a) for a in self.a], self.b, self.F


def dace_generate(m: int, n: int, v: int, seed: int, perm_keys: Optional[PermKeyPair] = None,
                  group: str = "ed25519", security_bits: int = MIN_SECURITY_BITS) -> DAceInstance:
    if m < 1 or n < 1:
        raise ValueError("m and n must be at least 1")
    if v not in (0, 1):
        raise ValueError("v must be 0 or 1")
    rng = SeededRandomSource(seed, label=b"ace/d-ace")
    params = get_group(group)
    p = params.order
    g = params.generator
    perm_keys = perm_keys or perm_keygen(security_bits, rng)

    a, b, c, cells_i, cells_f = [], [], [], [], []
    for i in range(m):
        a_i = int.from_bytes(rng.read(security_bits // 8), "big")
        chain = sample_chain_origin(perm_keys.public, rng)
        row_b, row_c, row_i, row_f = [], [], [], []
        for j in range(n):
            c_ij = int.from_bytes(rng.read(security_bits // 8), "big")
            chain = perm_inverse(perm_keys.secret, chain)
            b_ij = chain.value % p
            if b_ij == 0:
                raise DAceRegenerateFault(f"b[{i}][{j}] is 0 mod p")
            if c_ij % p == 0:
                raise DAceRegenerateFault(f"c[{i}][{j}] is 0 mod p")
            exponent = b_ij * a_i % p
            row_i.append(params.exp(g, exponent))
            if v == 0:
                row_f.append(params.exp(g, exponent * pow(c_ij, -1, p)))
            else:
                row_f.append(params.random_element(rng))
            row_b.append(b_ij)
            row_c.append(c_ij)
        a.append(a_i)
        b.append(row_b)
        c.append(row_c)
        cells_i.append(row_i)
        cells_f.append(row_f)

    logger.debug(f"Generated {m}x{n} instance, case {v}")
    return DAceInstance(m, n, v, a, b, c, cells_i, cells_f)


def dace_verify_real(instance: DAceInstance) -> bool:
    """True when F_ij^c_ij = I_ij in every cell."""
    for row_f, row_c, row_i in zip(instance.F, instance.c, instance.I):
        for f, c, expected in zip(row_f, row_c, row_i):
            if f.group.exp(f, c) != expected:
                return False
    return True
