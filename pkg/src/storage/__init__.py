"""
Storage engine: namespaced key-value stores, snapshots and storage metrics.
"""

from .engine import KvNamespace, KvStore, MemoryKvStore, Mutation, NAMESPACES, ReadWriteLock, open_store
from .metrics import StorageMetrics, storage_metrics
from .snapshot import snapshot_export, snapshot_import
