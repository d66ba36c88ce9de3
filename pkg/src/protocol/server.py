"""
Data Server role: holds FSet/ISet, applies add batches and deletion tokens, runs searches.
Searches share the store's read lock; add and delete take it exclusively.
"""

import logging
from typing import List, Optional, Tuple

from src.crypto_suite import (
    PermDomainValue, Scalar, group_exp, keyed_hash, perm_forward, reduce_to_scalar,
)
from src.errors import (
    ConsistencyFault, DomainError, DuplicateLabelFault, MalformedTokenError,
)
from src.storage.engine import KvStore, MemoryKvStore, Mutation

from .keys import PublicParams, load_public
from .models import AddBatch, DeleteToken, DeletionReport, SearchOutcome, SearchToken

logger = logging.getLogger(__name__)


class DataServer:
    def __init__(self, public: PublicParams, store: Optional[KvStore] = None):
        self.public = public
        self.store = store if store is not None else MemoryKvStore(public.group.element_width)

    @classmethod
    def open(cls, store: KvStore) -> "DataServer":
        return cls(load_public(store), store)

    @property
    def group(self):
        return self.public.group

    def index_size(self) -> int:
        return self.store.count("iset")

    def row_count(self) -> int:
        return self.store.count("fset")

    def _add_mutations(self, batch: AddBatch) -> List[Mutation]:
        width = self.group.element_width
        mutations = []
        seen = set()
        for entry in batch.entries:
            if entry.label in seen or self.store.get("iset", entry.label) is not None:
                raise DuplicateLabelFault(f"label {entry.label[:4].hex()}... already indexed")
            seen.add(entry.label)
            mutations.append(Mutation.put("iset", entry.label, entry.ciphertext))
        for row in batch.rows:
            for delta in row.deltas:
                if len(delta) != width:
                    raise MalformedTokenError(f"delta must be {width} bytes")
                mutations.append(Mutation.append("fset", row.r_id, delta))
        return mutations

    def check_add(self, batch: AddBatch) -> None:
        """Raise exactly what apply_add would raise, without changing the store."""
        with self.store.lock.read_locked():
            self._add_mutations(batch)

    def apply_add(self, batch: AddBatch) -> None:
        if batch.is_empty:
            return
        with self.store.lock.write_locked():
            self.store.apply_atomic(self._add_mutations(batch))
        logger.info(f"Applied add batch: {len(batch.entries)} index entries, {len(batch.rows)} rows")

    def apply_delete(self, token: DeleteToken) -> DeletionReport:
        return self.delete_row(token)[0]

    def delete_row(self, token: DeleteToken) -> Tuple[DeletionReport, List[bytes]]:
        """Apply a delete token; also returns the ISet labels it removed."""
        try:
            tag_id = Scalar(token.tag_id, self.group.order)
        except DomainError as exc:
            raise MalformedTokenError(f"delete token: {exc}") from exc

        with self.store.lock.write_locked():
            row = self.store.get("fset", token.r_id)
            if row is None:
                logger.warning("Delete token matched no FSet row; nothing removed")
                return DeletionReport(removed_count=0, row_removed=False), []

            labels = []
            for blob in row:
                delta = self.group.decode(blob)
                label = keyed_hash(self.public.hash_key, group_exp(delta, tag_id))
                if self.store.get("iset", label) is None:
                    raise ConsistencyFault(f"derived label {label[:4].hex()}... is not indexed")
                labels.append(label)
            mutations = [Mutation.delete("iset", label) for label in labels]
            mutations.append(Mutation.delete("fset", token.r_id))
            self.store.apply_atomic(mutations)

        logger.info(f"Deleted FSet row {token.r_id[:4].hex()}... with {len(row)} index entries")
        return DeletionReport(removed_count=len(row), row_removed=True), labels

    def _parse_search(self, token: SearchToken):
        try:
            tk = self.group.decode(token.tk)
            st = PermDomainValue(token.st, self.public.modulus)
        except DomainError as exc:
            raise MalformedTokenError(f"search token: {exc}") from exc
        return tk, st

    def search(self, token: SearchToken) -> SearchOutcome:
        """
        Walk the chain from ST_c down to ST_1, one label lookup per step.
        Always performs exactly c steps; deleted slots are counted as skipped.
        """
        tk, st = self._parse_search(token)
        hits = []
        skipped = 0
        with self.store.lock.read_locked():
            for _ in range(token.c, 0, -1):
                label = keyed_hash(self.public.hash_key, group_exp(tk, reduce_to_scalar(st, self.group)))
                ciphertext = self.store.get("iset", label)
                if ciphertext is None:
                    skipped += 1
                else:
                    hits.append(ciphertext)
                st = perm_forward(self.public.perm_public, st)

        logger.info(f"Search finished: {token.c} iterations, {len(hits)} hits, {skipped} skipped")
        return SearchOutcome(rset=hits, iterations=token.c, skipped=skipped)
