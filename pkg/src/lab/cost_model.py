"""
Analytical costs and measured primitive counts for single operations.

Expected counts per operation:
  add one ID with x new keywords (trustee): x permutation inverses, 2x exponentiations,
      x keyed hashes, x encryptions, one F and one F_p per new keyword and per ID
  delete an ID holding x keywords: trustee one F and one F_p; server x exponentiations
      and x keyed hashes
  search matching alpha entries: vetter one F_p and one exponentiation; server alpha
      exponentiations, keyed hashes and forward permutations

The addition row of the published cost table charges one encryption per ID; the
algorithm encrypts once per (ID, keyword) pair and the counts here follow the algorithm.
"""

from typing import Dict, Literal, Optional

from pydantic import BaseModel

from src.config import HASH_WIDTH, PRF_WIDTH, SCALAR_WIDTH
from src.crypto_suite import OpCounters, PermKeyPair, SeededRandomSource, count_operations
from src.crypto_suite.primitives import ciphertext_width
from src.protocol import setup
from src.wire.codec import CHECKSUM_WIDTH, HEADER_WIDTH

OperationKind = Literal["add", "delete", "search"]


class CostMeasurement(BaseModel):
    kind: str
    param: int
    counters: Dict[str, Dict[str, int]]


def expected_add(x: int, new_keywords: Optional[int] = None, new_ids: int = 1) -> OpCounters:
    new_keywords = x if new_keywords is None else new_keywords
    return OpCounters(prf_calls=new_keywords + new_ids, scalar_prf_calls=new_keywords + new_ids,
                      perm_inverses=x, group_exps=2 * x, hashes=x, encryptions=x)


def expected_delete(x: int) -> Dict[str, OpCounters]:
    return {"trustee": OpCounters(prf_calls=1, scalar_prf_calls=1),
            "server": OpCounters(group_exps=x, hashes=x)}


def expected_search(alpha: int) -> Dict[str, OpCounters]:
    return {"vetter": OpCounters(scalar_prf_calls=1, group_exps=1),
            "server": OpCounters(group_exps=alpha, hashes=alpha, perm_forwards=alpha)}


def count_operation(kind: OperationKind, param: int, perm_keys: Optional[PermKeyPair] = None,
                    group: str = "ed25519", seed: int = 0) -> CostMeasurement:
    """
    Measure one operation on a fresh system.

    param is x (keywords of the one ID) for add and delete, alpha (matching IDs) for search.
    """
    if param < 1:
        raise ValueError("operation parameter must be at least 1")
    trustee, vetter, server = setup(rng=SeededRandomSource(seed), perm_keys=perm_keys, group=group)
    keywords = [f"kw:{i}" for i in range(param)]
    counters: Dict[str, Dict[str, int]] = {}

    if kind == "add":
        with count_operations() as trustee_counts:
            trustee.add_batch([(b"ID-measured", keywords)])
        counters["trustee"] = trustee_counts.as_dict()

    elif kind == "delete":
        batch, _ = trustee.add_batch([(b"ID-measured", keywords)])
        server.apply_add(batch)
        with count_operations() as trustee_counts:
            token = trustee.issue_delete(b"ID-measured")
        with count_operations() as server_counts:
            server.apply_delete(token)
        counters["trustee"] = trustee_counts.as_dict()
        counters["server"] = server_counts.as_dict()

    elif kind == "search":
        batch, w_delta = trustee.add_batch([(f"ID-{i}".encode(), ["kw:target"]) for i in range(param)])
        server.apply_add(batch)
        vetter.sync(w_delta)
        with count_operations() as vetter_counts:
            token = vetter.issue_search("kw:target")
        with count_operations() as server_counts:
            server.search(token)
        counters["vetter"] = vetter_counts.as_dict()
        counters["server"] = server_counts.as_dict()

    else:
        raise ValueError(f"unknown operation kind {kind!r}")
    return CostMeasurement(kind=kind, param=param, counters=counters)


# --- sizes ---

FRAME_OVERHEAD = HEADER_WIDTH + CHECKSUM_WIDTH


def delete_token_body() -> int:
    return SCALAR_WIDTH + PRF_WIDTH


def search_token_body(element_width: int, perm_width: int) -> int:
    return element_width + perm_width + 8


def add_batch_body(r: int, x: int, element_width: int, id_length: int) -> int:
    """Encoded AddBatch body for r IDs of x keywords each."""
    entries = r * x * (HASH_WIDTH + 4 + ciphertext_width(id_length))
    rows = r * (PRF_WIDTH + 4 + x * element_width)
    return 4 + entries + 4 + rows


def fset_bytes(r: int, x: int, element_width: int) -> int:
    """Snapshot bytes of FSet entries: per row two u32 lengths, r_ID and x deltas."""
    return r * (8 + PRF_WIDTH + x * element_width)


def iset_bytes(r: int, x: int, id_length: int) -> int:
    return r * x * (8 + HASH_WIDTH + ciphertext_width(id_length))


def egdb_bytes(r: int, x: int, element_width: int, id_length: int) -> int:
    """Closed form r(l_F + x(l_E + l_D + l_h)) plus the 8 bytes of framing per entry."""
    return fset_bytes(r, x, element_width) + iset_bytes(r, x, id_length)


def pairwise_delete_token_bytes(x: int, id_length: int) -> int:
    """Deletion token of a pair-based scheme that ships x(2 l_h + l_E) bytes per ID."""
    return x * (2 * HASH_WIDTH + ciphertext_width(id_length))
