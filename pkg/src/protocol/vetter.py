"""
Vetter role: search-token issuance, result decryption and W synchronization.
"""

import logging
from typing import Callable, Iterable, List, Optional, Set

from src.crypto_suite import (
    CipherKey, PermDomainValue, group_exp, prf_bytes, prf_scalar, se_decrypt,
)
from src.errors import AuthorizationError, IntegrityError, ResultIntegrityError, StalenessError
from src.storage.engine import KvStore, Mutation

from .keys import VetterKeys, load_vetter_keys
from .models import SearchToken, WDelta
from .wmap import read_sequence, read_state, sequence_mutation, state_mutation

logger = logging.getLogger(__name__)

QueryPolicy = Callable[[str], bool]


def allow_all(keyword: str) -> bool:
    return True


class Vetter:
    def __init__(self, keys: VetterKeys, store: KvStore, policy: QueryPolicy = allow_all):
        self.keys = keys
        self.store = store
        self.policy = policy

    @classmethod
    def open(cls, store: KvStore, policy: QueryPolicy = allow_all) -> "Vetter":
        return cls(load_vetter_keys(store), store, policy)

    def issue_search(self, keyword: str) -> Optional[SearchToken]:
        """Token for keyword, or None when the keyword was never indexed (no server round)."""
        if not self.policy(keyword):
            raise AuthorizationError("query denied by policy")
        public = self.keys.public
        state = read_state(self.store, keyword, public.modulus)
        if state is None:
            logger.warning("Keyword not in W; returning an empty result without a server round")
            return None
        tag_w = prf_scalar(self.keys.tag_key, keyword.encode("utf-8"), public.group)
        tk = group_exp(public.generator, tag_w)
        return SearchToken(tk=tk.encode(), st=state.st, c=state.counter)

    def decrypt_results(self, keyword: str, rset: Iterable[bytes]) -> Set[bytes]:
        rset = list(rset)
        if not rset:
            return set()
        cipher_key = CipherKey(prf_bytes(self.keys.search_key, keyword.encode("utf-8")))
        identifiers = set()
        for index, ciphertext in enumerate(rset):
            try:
                identifiers.add(se_decrypt(cipher_key, ciphertext))
            except IntegrityError as exc:
                raise ResultIntegrityError(f"result entry {index} failed authentication",
                                           index=index) from exc
        return identifiers

    def _sync_mutations(self, delta: WDelta) -> List[Mutation]:
        modulus = self.keys.public.modulus
        applied = read_sequence(self.store)
        if delta.sequence != applied + 1:
            raise StalenessError(f"expected W-delta {applied + 1}, got {delta.sequence}")
        mutations = []
        for entry in delta.entries:
            current = read_state(self.store, entry.keyword, modulus)
            counter = 0 if current is None else current.counter
            if entry.previous_counter != counter or entry.counter <= counter:
                raise StalenessError("W-delta counter does not extend the local chain")
            mutations.append(state_mutation(entry.keyword, PermDomainValue(entry.st, modulus),
                                            entry.counter))
        mutations.append(sequence_mutation(delta.sequence))
        return mutations

    def check_sync(self, delta: WDelta) -> None:
        """Raise the StalenessError sync() would raise, without applying anything."""
        if not delta.entries:
            return
        with self.store.lock.read_locked():
            self._sync_mutations(delta)

    def sync(self, delta: WDelta) -> None:
        """Apply a W-delta from the Trustee; deltas must arrive in issuance order."""
        if not delta.entries:
            return
        with self.store.lock.write_locked():
            self.store.apply_atomic(self._sync_mutations(delta))
        logger.info(f"Synchronized W-delta {delta.sequence} ({len(delta.entries)} keywords)")
