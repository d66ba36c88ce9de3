"""
System setup: draws all key material and hands each role its projection.
"""

import logging
from typing import Optional, Tuple

from src.config import DEFAULT_PERM_BITS, MIN_SECURITY_BITS
from src.crypto_suite import (
    HashKey, PermKeyPair, PrfKey, RandomSource, ScalarPrfKey, SystemRandomSource, get_group,
    perm_keygen,
)
from src.errors import DomainError
from src.storage.engine import KvStore, MemoryKvStore

from .keys import KeyMaterial, PublicParams, public_mutations, trustee_mutations, vetter_mutations
from .server import DataServer
from .trustee import Trustee
from .vetter import Vetter, QueryPolicy, allow_all

logger = logging.getLogger(__name__)


def generate_keys(security_bits: int = MIN_SECURITY_BITS, rng: Optional[RandomSource] = None,
                  perm_keys: Optional[PermKeyPair] = None, group: str = "ed25519",
                  modulus_bits: int = DEFAULT_PERM_BITS) -> KeyMaterial:
    if security_bits < MIN_SECURITY_BITS:
        raise DomainError(f"security must be at least {MIN_SECURITY_BITS} bits")
    rng = rng or SystemRandomSource()
    if perm_keys is None:
        perm_keys = perm_keygen(security_bits, rng, modulus_bits)
    public = PublicParams(get_group(group), perm_keys.public, HashKey.generate(rng))
    return KeyMaterial(
        search_key=PrfKey.generate(rng),
        index_key=PrfKey.generate(rng),
        tag_key=ScalarPrfKey.generate(rng),
        id_tag_key=ScalarPrfKey.generate(rng),
        perm_keys=perm_keys,
        public=public,
    )


def setup(security_bits: int = MIN_SECURITY_BITS, rng: Optional[RandomSource] = None,
          perm_keys: Optional[PermKeyPair] = None, group: str = "ed25519",
          trustee_store: Optional[KvStore] = None, vetter_store: Optional[KvStore] = None,
          server_store: Optional[KvStore] = None, policy: QueryPolicy = allow_all,
          modulus_bits: int = DEFAULT_PERM_BITS, **trustee_options) -> Tuple[Trustee, Vetter, DataServer]:
    """
    Create the three roles with fresh keys and empty W/EGDB.

    perm_keys lets callers reuse an RSA key pair (key generation dominates setup time);
    stores default to in-memory ones.
    """
    rng = rng or SystemRandomSource()
    keys = generate_keys(security_bits, rng, perm_keys, group, modulus_bits)
    width = keys.public.group.element_width
    trustee_store = trustee_store if trustee_store is not None else MemoryKvStore(width)
    vetter_store = vetter_store if vetter_store is not None else MemoryKvStore(width)
    server_store = server_store if server_store is not None else MemoryKvStore(width)

    trustee_store.apply_atomic(trustee_mutations(keys))
    vetter_keys = keys.vetter_view()
    vetter_store.apply_atomic(vetter_mutations(vetter_keys))
    server_store.apply_atomic(public_mutations(keys.server_view()))

    logger.info(f"Setup complete: group {keys.public.group.name}, "
                f"{keys.public.modulus.bit_length()}-bit permutation")
    return (
        Trustee(keys, trustee_store, rng, **trustee_options),
        Vetter(vetter_keys, vetter_store, policy),
        DataServer(keys.server_view(), server_store),
    )
