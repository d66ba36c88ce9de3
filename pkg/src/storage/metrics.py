"""
Storage accounting over the serialized snapshot sections.
Per-namespace byte counts cover the encoded entries only (u32 key length, key,
u32 value length, value); the fixed framing is reported in total_bytes.
"""

from typing import Dict

from pydantic import BaseModel

from .engine import NAMESPACES, KvStore
from .snapshot import encode_entry, snapshot_export

ENTRY_FRAMING = 8


class StorageMetrics(BaseModel):
    fset_bytes: int = 0
    iset_bytes: int = 0
    wmap_bytes: int = 0
    keys_bytes: int = 0
    total_bytes: int = 0
    entry_counts: Dict[str, int] = {}


def namespace_bytes(store: KvStore, ns: str) -> int:
    return sum(len(encode_entry(key, value)) for key, value in store.items(ns))


def storage_metrics(store: KvStore) -> StorageMetrics:
    with store.lock.read_locked():
        sizes = {ns: namespace_bytes(store, ns) for ns in NAMESPACES}
        counts = {ns: store.count(ns) for ns in NAMESPACES}
    return StorageMetrics(
        fset_bytes=sizes["fset"],
        iset_bytes=sizes["iset"],
        wmap_bytes=sizes["wmap"],
        keys_bytes=sizes["keys"],
        total_bytes=len(snapshot_export(store)),
        entry_counts=counts,
    )
