"""
Key-value storage engine.
Four namespaces back the role states: fset (r_ID -> ordered delta list), iset
(label -> ciphertext), wmap (keyword -> chain state) and keys (role key material).
Backends share the KvStore contract: map semantics per namespace, all-or-nothing
apply_atomic, canonical (lexicographic) iteration and a readers-writer lock.
"""

import logging
import threading
from abc import ABC, abstractmethod
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Literal, Optional, Sequence, Tuple, Union

from src.errors import KeyWidthError, StorageError

logger = logging.getLogger(__name__)

Value = Union[bytes, List[bytes]]


@dataclass(frozen=True)
class KvNamespace:
    name: str
    tag: int
    key_width: Optional[int]
    is_list: bool = False


NAMESPACES: Dict[str, KvNamespace] = {
    "fset": KvNamespace("fset", 0x01, 16, is_list=True),
    "iset": KvNamespace("iset", 0x02, 32),
    "wmap": KvNamespace("wmap", 0x03, None),
    "keys": KvNamespace("keys", 0x04, None),
}


def namespace(name: str) -> KvNamespace:
    try:
        return NAMESPACES[name]
    except KeyError:
        raise StorageError(f"unknown namespace {name!r}") from None


@dataclass(frozen=True)
class Mutation:
    op: Literal["put", "delete", "append"]
    namespace: str
    key: bytes
    value: Optional[Value] = None

    @classmethod
    def put(cls, ns: str, key: bytes, value: Value) -> "Mutation":
        return cls("put", ns, key, value)

    @classmethod
    def delete(cls, ns: str, key: bytes) -> "Mutation":
        return cls("delete", ns, key)

    @classmethod
    def append(cls, ns: str, key: bytes, item: bytes) -> "Mutation":
        return cls("append", ns, key, item)


class ReadWriteLock:
    """Many readers or one writer; waiting writers block new readers."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False
        self._waiting_writers = 0

    @contextmanager
    def read_locked(self) -> Iterator[None]:
        with self._cond:
            while self._writer or self._waiting_writers:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if not self._readers:
                    self._cond.notify_all()

    @contextmanager
    def write_locked(self) -> Iterator[None]:
        with self._cond:
            self._waiting_writers += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._waiting_writers -= 1
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


_TOMBSTONE = object()


class KvStore(ABC):
    """
    Contract shared by the backends.

    element_width is the byte width of fset list items (one encoded group element).
    fault_hook, when set, is called with the index of each mutation just before it is
    staged; raising from it aborts the batch (used by the crash-atomicity tests).
    """

    def __init__(self, element_width: int = 32):
        self.element_width = element_width
        self.lock = ReadWriteLock()
        self._commit_mutex = threading.Lock()
        self.fault_hook: Optional[Callable[[int, Mutation], None]] = None

    # --- single-mutation helpers ---

    def put(self, ns: str, key: bytes, value: Value) -> None:
        self.apply_atomic([Mutation.put(ns, key, value)])

    def delete(self, ns: str, key: bytes) -> None:
        self.apply_atomic([Mutation.delete(ns, key)])

    def append(self, ns: str, key: bytes, item: bytes) -> None:
        self.apply_atomic([Mutation.append(ns, key, item)])

    # --- validation ---

    def _check_key(self, ns: KvNamespace, key: bytes) -> None:
        if not isinstance(key, (bytes, bytearray)) or not key:
            raise KeyWidthError(f"{ns.name} keys must be nonempty bytes")
        if ns.key_width is not None and len(key) != ns.key_width:
            raise KeyWidthError(f"{ns.name} keys are {ns.key_width} bytes, got {len(key)}")

    def _check_item(self, ns: KvNamespace, item: bytes) -> None:
        if len(item) != self.element_width:
            raise KeyWidthError(f"{ns.name} items are {self.element_width} bytes, got {len(item)}")

    def _validate(self, mutation: Mutation) -> KvNamespace:
        ns = namespace(mutation.namespace)
        self._check_key(ns, mutation.key)
        if mutation.op == "append":
            if not ns.is_list:
                raise StorageError(f"append on non-list namespace {ns.name}")
            self._check_item(ns, mutation.value)
        elif mutation.op == "put":
            if ns.is_list:
                for item in mutation.value:
                    self._check_item(ns, item)
            elif not isinstance(mutation.value, (bytes, bytearray)):
                raise StorageError(f"{ns.name} values are bytes")
        elif mutation.op != "delete":
            raise StorageError(f"unknown mutation {mutation.op!r}")
        return ns

    def _stage(self, mutations: Sequence[Mutation]) -> Dict[Tuple[str, bytes], object]:
        """Fold mutations into an overlay without touching committed state."""
        overlay: Dict[Tuple[str, bytes], object] = {}
        for index, mutation in enumerate(mutations):
            if self.fault_hook is not None:
                self.fault_hook(index, mutation)
            ns = self._validate(mutation)
            slot = (ns.name, bytes(mutation.key))
            if mutation.op == "put":
                overlay[slot] = list(mutation.value) if ns.is_list else bytes(mutation.value)
            elif mutation.op == "delete":
                overlay[slot] = _TOMBSTONE
            else:
                current = overlay[slot] if slot in overlay else self._read(ns.name, slot[1])
                if current is None or current is _TOMBSTONE:
                    current = []
                elif slot not in overlay:
                    current = list(current)
                current.append(bytes(mutation.value))
                overlay[slot] = current
        return overlay

    def apply_atomic(self, mutations: Sequence[Mutation]) -> None:
        """Stage and commit as one step; concurrent batches are serialized here."""
        if not mutations:
            return
        with self._commit_mutex:
            overlay = self._stage(mutations)
            self._commit(overlay)
        logger.debug(f"Committed {len(mutations)} mutations")

    def get(self, ns: str, key: bytes) -> Optional[Value]:
        spec = namespace(ns)
        self._check_key(spec, key)
        return self._read(ns, bytes(key))

    # --- backend hooks ---

    @abstractmethod
    def _read(self, ns: str, key: bytes) -> Optional[Value]:
        ...

    @abstractmethod
    def _commit(self, overlay: Dict[Tuple[str, bytes], object]) -> None:
        ...

    @abstractmethod
    def items(self, ns: str) -> Iterator[Tuple[bytes, Value]]:
        """Entries of a namespace in lexicographic key order."""

    @abstractmethod
    def count(self, ns: str) -> int:
        ...

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class MemoryKvStore(KvStore):
    def __init__(self, element_width: int = 32):
        super().__init__(element_width)
        self._data: Dict[str, Dict[bytes, Value]] = {name: {} for name in NAMESPACES}

    def _read(self, ns: str, key: bytes) -> Optional[Value]:
        value = self._data[ns].get(key)
        if isinstance(value, list):
            return list(value)
        return value

    def _commit(self, overlay) -> None:
        for (ns, key), value in overlay.items():
            if value is _TOMBSTONE:
                self._data[ns].pop(key, None)
            else:
                self._data[ns][key] = value

    def items(self, ns: str) -> Iterator[Tuple[bytes, Value]]:
        namespace(ns)
        table = self._data[ns]
        for key in sorted(table):
            value = table.get(key)
            if value is None:
                continue
            yield key, list(value) if isinstance(value, list) else value

    def count(self, ns: str) -> int:
        namespace(ns)
        return len(self._data[ns])


# list values are stored by the file backend as a plain concatenation of items
def join_items(items: Sequence[bytes]) -> bytes:
    return b"".join(items)


def split_items(blob: bytes, width: int) -> List[bytes]:
    if len(blob) % width:
        raise StorageError(f"list value of {len(blob)} bytes is not a multiple of {width}")
    return [blob[i:i + width] for i in range(0, len(blob), width)]


def open_store(backend: str, path=None, element_width: int = 32) -> KvStore:
    """Open a memory store, or the SQLite file store at path."""
    if backend == "memory":
        return MemoryKvStore(element_width)
    if backend == "sqlite":
        from .database import SqliteKvStore
        if path is None:
            raise StorageError("sqlite backend needs a path")
        return SqliteKvStore(path, element_width)
    raise StorageError(f"unknown storage backend {backend!r}")
