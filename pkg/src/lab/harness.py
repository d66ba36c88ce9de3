"""
Key-holding harness.
Has the Trustee's keys and read access to the server store, so it can derive the
server-side footprint of an identifier (r_ID, live labels, delta encodings), check the
delta-to-label invariant of EGDB and scan snapshots for bytes that should be gone.
"""

import logging
from typing import Dict, Iterable, List, Tuple

from src.crypto_suite import (
    PermDomainValue, Scalar, group_exp, keyed_hash, perm_forward, prf_bytes, prf_scalar,
)
from src.protocol.keys import KeyMaterial
from src.protocol.server import DataServer
from src.protocol.wmap import read_state

logger = logging.getLogger(__name__)


class ChainRecorder:
    """on_chain_origin hook that remembers ST_0 per keyword."""

    def __init__(self):
        self.origins: Dict[str, PermDomainValue] = {}

    def __call__(self, keyword: str, origin: PermDomainValue) -> None:
        self.origins[keyword] = origin


class KeyHoldingHarness:
    def __init__(self, keys: KeyMaterial, server: DataServer):
        self.keys = keys
        self.server = server

    def derive(self, identifier: bytes) -> Tuple[bytes, Scalar]:
        tag_id = prf_scalar(self.keys.id_tag_key, identifier, self.keys.public.group)
        return prf_bytes(self.keys.index_key, identifier), tag_id

    def row_deltas(self, identifier: bytes) -> List[bytes]:
        r_id, _ = self.derive(identifier)
        return self.server.store.get("fset", r_id) or []

    def live_labels(self, identifier: bytes) -> List[bytes]:
        _, tag_id = self.derive(identifier)
        group = self.keys.public.group
        return [keyed_hash(self.keys.public.hash_key, group_exp(group.decode(blob), tag_id))
                for blob in self.row_deltas(identifier)]

    def footprint(self, identifier: bytes) -> List[bytes]:
        """Every server-side byte string tied to the identifier: r_ID, deltas, labels."""
        r_id, _ = self.derive(identifier)
        return [r_id] + self.row_deltas(identifier) + self.live_labels(identifier)

    def check_invariants(self, identifiers: Iterable[bytes]) -> List[str]:
        """Each delta of each listed row must map to a live label; ISet size must match FSet."""
        problems = []
        store = self.server.store
        for identifier in identifiers:
            for label in self.live_labels(identifier):
                if store.get("iset", label) is None:
                    problems.append(f"delta of {identifier!r} maps to a missing label")
        total_deltas = sum(len(row) for _, row in store.items("fset"))
        if total_deltas != store.count("iset"):
            problems.append(f"ISet holds {store.count('iset')} entries for {total_deltas} deltas")
        return problems

    def check_chain(self, keyword: str, origin: PermDomainValue, store) -> bool:
        """Walking W[keyword] forward c times must land on the recorded ST_0."""
        public = self.keys.public
        state = read_state(store, keyword, public.modulus)
        if state is None:
            return False
        st = PermDomainValue(state.st, public.modulus)
        for _ in range(state.counter):
            st = perm_forward(public.perm_public, st)
        return st == origin


def scan_for_leaks(snapshot: bytes, needles: Iterable[bytes]) -> List[bytes]:
    """Needles that still occur anywhere in the snapshot bytes."""
    return [needle for needle in needles if needle and needle in snapshot]
