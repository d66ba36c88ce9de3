"""
Snapshot format.

    "ACEDB" | version (1 byte)
    per namespace, in tag order:
        tag (1 byte) | entry count (u64 BE)
        entries in lexicographic key order: key length (u32 BE) | key | value length (u32 BE) | value
    SHA-256 over everything above (32 bytes)

List values (fset rows) are written as the concatenation of their items.
"""

import logging
import struct
from typing import Optional

from Crypto.Hash import SHA256

from src.config import CHECKSUM_WIDTH, SNAPSHOT_MAGIC, SNAPSHOT_VERSION
from src.errors import SnapshotChecksumError, StorageError
from .engine import NAMESPACES, KvStore, MemoryKvStore, Mutation, join_items, split_items

logger = logging.getLogger(__name__)

_ORDERED = sorted(NAMESPACES.values(), key=lambda ns: ns.tag)


def encode_entry(key: bytes, value) -> bytes:
    blob = join_items(value) if isinstance(value, list) else value
    return struct.pack(">I", len(key)) + key + struct.pack(">I", len(blob)) + blob


def export_section(store: KvStore, ns_name: str) -> bytes:
    ns = NAMESPACES[ns_name]
    entries = [encode_entry(key, value) for key, value in store.items(ns_name)]
    return bytes([ns.tag]) + struct.pack(">Q", len(entries)) + b"".join(entries)


def snapshot_export(store: KvStore) -> bytes:
    with store.lock.read_locked():
        body = SNAPSHOT_MAGIC + bytes([SNAPSHOT_VERSION])
        body += b"".join(export_section(store, ns.name) for ns in _ORDERED)
    return body + SHA256.new(body).digest()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise StorageError("snapshot is truncated")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]


def snapshot_import(data: bytes, element_width: int = 32, into: Optional[KvStore] = None) -> KvStore:
    """Rebuild a store from a snapshot; into defaults to a fresh MemoryKvStore."""
    header = len(SNAPSHOT_MAGIC) + 1
    if len(data) < header + CHECKSUM_WIDTH:
        raise StorageError("snapshot is truncated")
    body, checksum = data[:-CHECKSUM_WIDTH], data[-CHECKSUM_WIDTH:]
    if SHA256.new(body).digest() != checksum:
        raise SnapshotChecksumError("snapshot checksum mismatch")
    if body[:len(SNAPSHOT_MAGIC)] != SNAPSHOT_MAGIC:
        raise StorageError("not an ACE snapshot")
    if body[len(SNAPSHOT_MAGIC)] != SNAPSHOT_VERSION:
        raise StorageError(f"unsupported snapshot version {body[len(SNAPSHOT_MAGIC)]}")

    by_tag = {ns.tag: ns for ns in NAMESPACES.values()}
    reader = _Reader(body)
    reader.pos = header
    mutations = []
    while reader.pos < len(body):
        tag = reader.take(1)[0]
        if tag not in by_tag:
            raise StorageError(f"unknown namespace tag {tag:#04x}")
        ns = by_tag[tag]
        for _ in range(reader.u64()):
            key = reader.take(reader.u32())
            value = reader.take(reader.u32())
            if ns.is_list:
                value = split_items(value, element_width)
            mutations.append(Mutation.put(ns.name, key, value))

    store = into if into is not None else MemoryKvStore(element_width)
    with store.lock.write_locked():
        store.apply_atomic(mutations)
    logger.info(f"Imported snapshot with {len(mutations)} entries")
    return store
