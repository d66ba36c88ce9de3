"""
The W map: keyword -> (ST_c, c), persisted in the "wmap" namespace.
Values are the modulus-width chain value followed by a u64 counter.
"""

import struct
from typing import Dict, Optional

from src.crypto_suite import PermDomainValue
from src.storage.engine import KvStore, Mutation

from .models import KeywordState

SEQUENCE_KEY = b"w_sequence"


def keyword_key(keyword: str) -> bytes:
    return keyword.encode("utf-8")


def encode_state(st: PermDomainValue, counter: int) -> bytes:
    return st.to_bytes() + struct.pack(">Q", counter)


def read_state(store: KvStore, keyword: str, modulus: int) -> Optional[KeywordState]:
    blob = store.get("wmap", keyword_key(keyword))
    if blob is None:
        return None
    st = PermDomainValue.from_bytes(blob[:-8], modulus)
    return KeywordState(keyword=keyword, st=st.value, counter=struct.unpack(">Q", blob[-8:])[0])


def state_mutation(keyword: str, st: PermDomainValue, counter: int) -> Mutation:
    return Mutation.put("wmap", keyword_key(keyword), encode_state(st, counter))


def snapshot_w(store: KvStore, modulus: int) -> Dict[str, KeywordState]:
    """Whole W map, for comparing the Trustee and Vetter copies."""
    states = {}
    for key, blob in store.items("wmap"):
        keyword = key.decode("utf-8")
        states[keyword] = KeywordState(
            keyword=keyword,
            st=PermDomainValue.from_bytes(blob[:-8], modulus).value,
            counter=struct.unpack(">Q", blob[-8:])[0],
        )
    return states


def read_sequence(store: KvStore) -> int:
    blob = store.get("keys", SEQUENCE_KEY)
    return 0 if blob is None else struct.unpack(">Q", blob)[0]


def sequence_mutation(sequence: int) -> Mutation:
    return Mutation.put("keys", SEQUENCE_KEY, struct.pack(">Q", sequence))
