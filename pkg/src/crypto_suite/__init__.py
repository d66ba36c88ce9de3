"""
Crypto suite: PRFs, keyed hash, authenticated encryption, RSA trapdoor permutation,
prime-order groups and operation counters.
"""

from .group import Ed25519Group, GroupElement, GroupParams, SafePrimeGroup, get_group
from .instrumentation import OpCounters, count_operations
from .models import CipherKey, HashKey, PermDomainValue, PrfKey, Scalar, ScalarPrfKey
from .permutation import (
    PermKeyPair, PermPublicKey, PermSecretKey, keypair_from_factors, perm_forward,
    perm_inverse, perm_keygen, sample_chain_origin,
)
from .primitives import (
    ciphertext_width, group_exp, keyed_hash, prf_bytes, prf_scalar, reduce_to_scalar,
    scalar_inv, scalar_mul, se_decrypt, se_encrypt,
)
from .randomness import RandomSource, SeededRandomSource, SystemRandomSource, make_random_source
