"""
Key material and its role projections.

The Trustee holds everything. The Vetter view is built from (K_S, K_T) and the public
values only, and the server view from the public values only; neither class has a slot
for K_1, K_2 or the permutation secret key.
"""

import logging
from dataclasses import dataclass
from typing import Dict

from src.crypto_suite import (
    GroupElement, GroupParams, HashKey, PermKeyPair, PermPublicKey, PrfKey, ScalarPrfKey,
    get_group, keypair_from_factors,
)
from src.errors import StorageError
from src.storage.engine import KvStore, Mutation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PublicParams:
    """PK, g, p and k_h."""
    group: GroupParams
    perm_public: PermPublicKey
    hash_key: HashKey

    @property
    def generator(self) -> GroupElement:
        return self.group.generator

    @property
    def modulus(self) -> int:
        return self.perm_public.modulus

    @property
    def perm_width(self) -> int:
        return self.perm_public.width


@dataclass(frozen=True)
class VetterKeys:
    search_key: PrfKey          # K_S
    tag_key: ScalarPrfKey       # K_T
    public: PublicParams


@dataclass(frozen=True)
class KeyMaterial:
    """Trustee key material: K_S, K_1, K_T, K_2, k_h and the permutation key pair."""
    search_key: PrfKey          # K_S
    index_key: PrfKey           # K_1
    tag_key: ScalarPrfKey       # K_T
    id_tag_key: ScalarPrfKey    # K_2
    perm_keys: PermKeyPair
    public: PublicParams

    def vetter_view(self) -> VetterKeys:
        return VetterKeys(self.search_key, self.tag_key, self.public)

    def server_view(self) -> PublicParams:
        return self.public


# --- persistence in the "keys" namespace ---

def _int_bytes(value: int) -> bytes:
    return value.to_bytes((value.bit_length() + 7) // 8 or 1, "big")


def _public_entries(public: PublicParams) -> Dict[bytes, bytes]:
    return {
        b"group": public.group.name.encode("ascii"),
        b"perm_n": _int_bytes(public.perm_public.modulus),
        b"perm_e": _int_bytes(public.perm_public.exponent),
        b"k_h": public.hash_key.material,
    }


def public_mutations(public: PublicParams):
    return [Mutation.put("keys", k, v) for k, v in _public_entries(public).items()]


def vetter_mutations(keys: VetterKeys):
    return public_mutations(keys.public) + [
        Mutation.put("keys", b"K_S", keys.search_key.material),
        Mutation.put("keys", b"K_T", keys.tag_key.material),
    ]


def trustee_mutations(keys: KeyMaterial):
    secret = keys.perm_keys.secret
    return public_mutations(keys.public) + [
        Mutation.put("keys", b"K_S", keys.search_key.material),
        Mutation.put("keys", b"K_1", keys.index_key.material),
        Mutation.put("keys", b"K_T", keys.tag_key.material),
        Mutation.put("keys", b"K_2", keys.id_tag_key.material),
        Mutation.put("keys", b"perm_p", _int_bytes(secret.p)),
        Mutation.put("keys", b"perm_q", _int_bytes(secret.q)),
    ]


def _require(store: KvStore, name: bytes) -> bytes:
    value = store.get("keys", name)
    if value is None:
        raise StorageError(f"store holds no {name.decode()} entry; was setup run?")
    return value


def load_public(store: KvStore) -> PublicParams:
    return PublicParams(
        group=get_group(_require(store, b"group").decode("ascii")),
        perm_public=PermPublicKey(int.from_bytes(_require(store, b"perm_n"), "big"),
                                  int.from_bytes(_require(store, b"perm_e"), "big")),
        hash_key=HashKey(_require(store, b"k_h")),
    )


def load_vetter_keys(store: KvStore) -> VetterKeys:
    return VetterKeys(PrfKey(_require(store, b"K_S")), ScalarPrfKey(_require(store, b"K_T")),
                      load_public(store))


def load_trustee_keys(store: KvStore) -> KeyMaterial:
    public = load_public(store)
    perm_keys = keypair_from_factors(int.from_bytes(_require(store, b"perm_p"), "big"),
                                     int.from_bytes(_require(store, b"perm_q"), "big"),
                                     public.perm_public.exponent)
    if perm_keys.modulus != public.modulus:
        raise StorageError("stored permutation factors do not match the public modulus")
    return KeyMaterial(
        search_key=PrfKey(_require(store, b"K_S")),
        index_key=PrfKey(_require(store, b"K_1")),
        tag_key=ScalarPrfKey(_require(store, b"K_T")),
        id_tag_key=ScalarPrfKey(_require(store, b"K_2")),
        perm_keys=perm_keys,
        public=public,
    )
