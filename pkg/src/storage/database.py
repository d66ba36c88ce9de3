"""
SQLite file backend for the key-value store.
Uses SQLAlchemy over one table; the journal runs in WAL mode with secure_delete on,
and the WAL is checkpointed after every batch that deletes, so revoked entries do not
linger in the file.
"""

import logging
from pathlib import Path
from typing import Iterator, Optional, Tuple

from sqlalchemy import Column, LargeBinary, String, create_engine, delete, event, func, select
from sqlalchemy.dialects.sqlite import insert as sqlite_insert
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import declarative_base, sessionmaker

from src.errors import StorageIOError
from .engine import _TOMBSTONE, KvStore, Value, join_items, namespace, split_items

logger = logging.getLogger(__name__)

Base = declarative_base()


class KvEntry(Base):
    __tablename__ = "kv_entries"

    namespace = Column(String(8), primary_key=True)
    key = Column(LargeBinary, primary_key=True)
    value = Column(LargeBinary, nullable=False)


def _configure_connection(dbapi_connection, _record) -> None:
    cursor = dbapi_connection.cursor()
    cursor.execute("PRAGMA journal_mode=WAL")
    cursor.execute("PRAGMA secure_delete=ON")
    cursor.execute("PRAGMA synchronous=FULL")
    cursor.close()


class SqliteKvStore(KvStore):
    def __init__(self, path, element_width: int = 32):
        super().__init__(element_width)
        self.path = Path(path)
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.engine = create_engine(f"sqlite:///{self.path}",
                                        connect_args={"check_same_thread": False})
            event.listen(self.engine, "connect", _configure_connection)
            Base.metadata.create_all(bind=self.engine)
        except (SQLAlchemyError, OSError) as exc:
            raise StorageIOError(f"cannot open store at {self.path}: {exc}") from exc
        self.SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=self.engine)
        logger.debug(f"Opened SQLite store {self.path}")

    def _decode(self, ns: str, blob: bytes) -> Value:
        if namespace(ns).is_list:
            return split_items(blob, self.element_width)
        return blob

    def _read(self, ns: str, key: bytes) -> Optional[Value]:
        db = self.SessionLocal()
        try:
            entry = db.get(KvEntry, (ns, key))
            return None if entry is None else self._decode(ns, entry.value)
        except SQLAlchemyError as exc:
            raise StorageIOError(f"read failed: {exc}") from exc
        finally:
            db.close()

    def _commit(self, overlay) -> None:
        upserts, removals = [], []
        for (ns, key), value in overlay.items():
            if value is _TOMBSTONE:
                removals.append((ns, key))
            else:
                blob = join_items(value) if isinstance(value, list) else value
                upserts.append({"namespace": ns, "key": key, "value": blob})

        db = self.SessionLocal()
        try:
            for ns, key in removals:
                db.execute(delete(KvEntry).where(KvEntry.namespace == ns, KvEntry.key == key))
            if upserts:
                stmt = sqlite_insert(KvEntry)
                stmt = stmt.on_conflict_do_update(
                    index_elements=[KvEntry.namespace, KvEntry.key],
                    set_={"value": stmt.excluded.value},
                )
                db.execute(stmt, upserts)
            db.commit()
        except SQLAlchemyError as exc:
            db.rollback()
            raise StorageIOError(f"batch commit failed: {exc}") from exc
        finally:
            db.close()

        if removals:
            self.checkpoint()

    def checkpoint(self) -> None:
        """Fold the WAL back into the main file and truncate it."""
        try:
            with self.engine.connect() as conn:
                conn.exec_driver_sql("PRAGMA wal_checkpoint(TRUNCATE)")
        except SQLAlchemyError as exc:
            raise StorageIOError(f"checkpoint failed: {exc}") from exc

    def items(self, ns: str) -> Iterator[Tuple[bytes, Value]]:
        namespace(ns)
        db = self.SessionLocal()
        try:
            rows = db.execute(
                select(KvEntry.key, KvEntry.value).where(KvEntry.namespace == ns).order_by(KvEntry.key)
            ).all()
        except SQLAlchemyError as exc:
            raise StorageIOError(f"scan failed: {exc}") from exc
        finally:
            db.close()
        for key, blob in rows:
            yield bytes(key), self._decode(ns, bytes(blob))

    def count(self, ns: str) -> int:
        namespace(ns)
        db = self.SessionLocal()
        try:
            return db.scalar(select(func.count()).select_from(KvEntry).where(KvEntry.namespace == ns))
        except SQLAlchemyError as exc:
            raise StorageIOError(f"count failed: {exc}") from exc
        finally:
            db.close()

    def close(self) -> None:
        self.engine.dispose()
