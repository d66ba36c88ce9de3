"""
Trustee role: batch insertion of (ID, keyword-set) records and deletion-token issuance.
"""

import logging
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from src.crypto_suite import (
    CipherKey, PermDomainValue, RandomSource, Scalar, SystemRandomSource, group_exp,
    keyed_hash, perm_inverse, prf_bytes, prf_scalar, reduce_to_scalar, sample_chain_origin,
    scalar_inv, scalar_mul, se_encrypt,
)
from src.errors import ProtocolError, StalenessError
from src.storage.engine import KvStore, Mutation

from .keys import KeyMaterial, load_trustee_keys
from .models import AddBatch, DeleteToken, DeltaRow, IndexEntry, WDelta, WDeltaEntry
from .wmap import read_sequence, read_state, sequence_mutation, state_mutation

logger = logging.getLogger(__name__)

ChainOriginHook = Callable[[str, PermDomainValue], None]
Record = Tuple[bytes, Iterable[str]]


class PreparedBatch(NamedTuple):
    batch: AddBatch
    w_delta: WDelta
    mutations: List[Mutation]


class _Chain:
    __slots__ = ("st", "counter", "previous_counter")

    def __init__(self, st: PermDomainValue, counter: int):
        self.st = st
        self.counter = counter
        self.previous_counter = counter


class Trustee:
    def __init__(self, keys: KeyMaterial, store: KvStore, rng: Optional[RandomSource] = None,
                 on_chain_origin: Optional[ChainOriginHook] = None):
        self.keys = keys
        self.store = store
        self.rng = rng or SystemRandomSource()
        self.on_chain_origin = on_chain_origin

    @classmethod
    def open(cls, store: KvStore, rng: Optional[RandomSource] = None, **kwargs) -> "Trustee":
        return cls(load_trustee_keys(store), store, rng, **kwargs)

    @property
    def group(self):
        return self.keys.public.group

    def _id_secrets(self, identifier: bytes) -> Tuple[Scalar, bytes]:
        tag_id = prf_scalar(self.keys.id_tag_key, identifier, self.group)
        r_id = prf_bytes(self.keys.index_key, identifier)
        return tag_id, r_id

    def _open_chain(self, keyword: str) -> _Chain:
        modulus = self.keys.public.modulus
        state = read_state(self.store, keyword, modulus)
        if state is not None:
            return _Chain(PermDomainValue(state.st, modulus), state.counter)
        origin = sample_chain_origin(self.keys.public.perm_public, self.rng)
        if self.on_chain_origin is not None:
            self.on_chain_origin(keyword, origin)
        return _Chain(origin, 0)

    def add_batch(self, records: Sequence[Record]) -> Tuple[AddBatch, WDelta]:
        """Index a batch of records and commit the new chain heads in one step."""
        prepared = self.prepare_batch(records)
        self.commit(prepared)
        return prepared.batch, prepared.w_delta

    def prepare_batch(self, records: Sequence[Record]) -> PreparedBatch:
        """
        Build the AddBatch and W-delta for a batch of records without touching W.

        Keywords are processed in order of first appearance and each record's keywords
        in the given order. Until commit() runs, a failed batch (zero residue, a rejected
        message, a server error) leaves W exactly as it was.
        """
        normalized = _normalize(records)
        sequence = read_sequence(self.store)
        if not normalized:
            return PreparedBatch(AddBatch(), WDelta(sequence=sequence, entries=[]), [])

        public = self.keys.public
        generator = public.generator
        keyword_secrets: Dict[str, Tuple[Scalar, CipherKey]] = {}
        id_secrets: Dict[bytes, Tuple[Scalar, bytes]] = {}
        chains: Dict[str, _Chain] = {}
        entries: List[IndexEntry] = []
        rows: Dict[bytes, List[bytes]] = {}

        for identifier, keywords in normalized:
            if identifier not in id_secrets:
                tag_id, r_id = self._id_secrets(identifier)
                id_secrets[identifier] = (scalar_inv(tag_id), r_id)
            inv_tag_id, r_id = id_secrets[identifier]
            row = rows.setdefault(r_id, [])

            for keyword in keywords:
                if keyword not in keyword_secrets:
                    data = keyword.encode("utf-8")
                    keyword_secrets[keyword] = (
                        prf_scalar(self.keys.tag_key, data, self.group),
                        CipherKey(prf_bytes(self.keys.search_key, data)),
                    )
                    chains[keyword] = self._open_chain(keyword)
                tag_w, cipher_key = keyword_secrets[keyword]
                chain = chains[keyword]

                chain.counter += 1
                chain.st = perm_inverse(self.keys.perm_keys.secret, chain.st)
                exponent = scalar_mul(reduce_to_scalar(chain.st, self.group), tag_w)

                label = keyed_hash(public.hash_key, group_exp(generator, exponent))
                ciphertext = se_encrypt(cipher_key, identifier, self.rng)
                delta = group_exp(generator, scalar_mul(exponent, inv_tag_id))

                entries.append(IndexEntry(label=label, ciphertext=ciphertext))
                row.append(delta.encode())

        batch = AddBatch(entries=entries,
                         rows=[DeltaRow(r_id=r_id, deltas=deltas) for r_id, deltas in rows.items()])
        delta_entries = [
            WDeltaEntry(keyword=keyword, st=chain.st.value, counter=chain.counter,
                        previous_counter=chain.previous_counter)
            for keyword, chain in chains.items()
        ]
        w_delta = WDelta(sequence=sequence + 1, entries=delta_entries)

        mutations = [state_mutation(kw, chain.st, chain.counter) for kw, chain in chains.items()]
        mutations.append(sequence_mutation(sequence + 1))

        logger.info(f"Built add batch: {len(id_secrets)} IDs, {len(chains)} keywords, "
                    f"{len(entries)} pairs")
        return PreparedBatch(batch, w_delta, mutations)

    def commit(self, prepared: PreparedBatch) -> None:
        """Persist the chain heads of a prepared batch; refuses if W moved since preparing."""
        if not prepared.mutations:
            return
        with self.store.lock.write_locked():
            current = read_sequence(self.store)
            if current != prepared.w_delta.sequence - 1:
                raise StalenessError(f"batch prepared against W {prepared.w_delta.sequence - 1}, "
                                     f"W is now at {current}")
            self.store.apply_atomic(prepared.mutations)

    def issue_delete(self, identifier: bytes) -> DeleteToken:
        if not identifier:
            raise ProtocolError("identifier must be nonempty")
        tag_id, r_id = self._id_secrets(bytes(identifier))
        return DeleteToken(tag_id=tag_id.value, r_id=r_id)


def _normalize(records: Sequence[Record]) -> List[Tuple[bytes, List[str]]]:
    normalized = []
    for identifier, keywords in records:
        if isinstance(identifier, str):
            identifier = identifier.encode("utf-8")
        if not identifier:
            raise ProtocolError("identifier must be nonempty")
        ordered = list(dict.fromkeys(keywords))
        if not ordered or any(not kw for kw in ordered):
            raise ProtocolError("each record needs a nonempty set of nonempty keywords")
        normalized.append((bytes(identifier), ordered))
    return normalized
