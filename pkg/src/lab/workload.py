"""
Randomized workloads checked against the plaintext oracle.

A seeded generator interleaves batch adds, revocations and searches. Every message goes
through the wire codec. After each search the decrypted result must equal the oracle's
answer; after each revocation the exported snapshot must no longer contain the revoked
identifier's r_ID, deltas or labels.
"""

import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from src.crypto_suite import PermKeyPair, SeededRandomSource
from src.protocol import setup
from src.storage import snapshot_export
from src.wire import codec

from .harness import KeyHoldingHarness, scan_for_leaks
from .oracle import PlainDatabase

logger = logging.getLogger(__name__)


class WorkloadSpec(BaseModel):
    identifiers: int = Field(default=500, ge=1)
    max_keywords: int = Field(default=50, ge=1)
    keyword_pool: int = Field(default=120, ge=1)
    adds: int = Field(default=200, ge=0)
    revokes: int = Field(default=50, ge=0)
    searches: int = Field(default=300, ge=0)
    max_batch: int = Field(default=4, ge=1)
    revoke_all: bool = False
    scan_snapshots: bool = True


class Divergence(BaseModel):
    step: int
    keyword: str
    expected: List[str]
    actual: List[str]


class EquivalenceReport(BaseModel):
    seed: int
    adds: int = 0
    revokes: int = 0
    searches: int = 0
    pairs_added: int = 0
    divergences: List[Divergence] = []
    work_mismatches: List[str] = []
    leaks: List[str] = []
    final_index_size: Optional[int] = None

    @property
    def ok(self) -> bool:
        return not (self.divergences or self.work_mismatches or self.leaks)


def _schedule(rng: np.random.Generator, spec: WorkloadSpec) -> List[str]:
    ops = ["add"] * spec.adds + ["revoke"] * spec.revokes + ["search"] * spec.searches
    rng.shuffle(ops)
    # the first operation is an add so early searches have something to find
    if "add" in ops:
        first = ops.index("add")
        ops[0], ops[first] = ops[first], ops[0]
    return ops


def run_workload(seed: int, spec: Optional[WorkloadSpec] = None, perm_keys: Optional[PermKeyPair] = None,
                 group: str = "ed25519") -> EquivalenceReport:
    spec = spec or WorkloadSpec()
    rng = np.random.default_rng(seed)
    trustee, vetter, server = setup(rng=SeededRandomSource(seed), perm_keys=perm_keys, group=group)
    ctx = codec.WireContext.from_public(server.public)
    harness = KeyHoldingHarness(trustee.keys, server)
    oracle = PlainDatabase()
    pool = [f"kw:{i}" for i in range(spec.keyword_pool)]
    counters = {}
    report = EquivalenceReport(seed=seed)
    scan_deltas = server.group.element_width >= 16

    def revoke(step: int, identifier: bytes) -> None:
        footprint = [harness.derive(identifier)[0]] + harness.live_labels(identifier)
        if scan_deltas:
            footprint += harness.row_deltas(identifier)
        token = codec.decode_delete_token(codec.encode_delete_token(trustee.issue_delete(identifier), ctx), ctx)
        server.apply_delete(token)
        oracle.revoke(identifier)
        report.revokes += 1
        if spec.scan_snapshots:
            leaked = scan_for_leaks(snapshot_export(server.store), footprint)
            if leaked:
                report.leaks.append(f"step {step}: {len(leaked)} byte strings survived revocation")

    def search(step: int, keyword: str) -> None:
        report.searches += 1
        expected = oracle.search(keyword)
        token = vetter.issue_search(keyword)
        if token is None:
            actual = set()
            if counters.get(keyword):
                report.work_mismatches.append(f"step {step}: no token for indexed keyword")
        else:
            token = codec.decode_search_token(codec.encode_search_token(token, ctx), ctx)
            outcome = server.search(token)
            rset = codec.decode_rset(codec.encode_rset(outcome.rset, ctx), ctx)
            actual = vetter.decrypt_results(keyword, rset)
            if outcome.iterations != counters.get(keyword, 0):
                report.work_mismatches.append(
                    f"step {step}: {outcome.iterations} iterations for counter {counters.get(keyword, 0)}")
            if outcome.skipped != outcome.iterations - outcome.hits:
                report.work_mismatches.append(f"step {step}: skipped count does not add up")
            if report.revokes == 0 and outcome.skipped:
                report.work_mismatches.append(f"step {step}: skipped slots without any revocation")
        if actual != expected:
            report.divergences.append(Divergence(
                step=step, keyword=keyword,
                expected=sorted(i.decode() for i in expected),
                actual=sorted(i.decode() for i in actual)))

    ops = _schedule(rng, spec)
    for step, op in enumerate(ops):
        if op == "add":
            records = []
            for _ in range(int(rng.integers(1, spec.max_batch + 1))):
                identifier = f"id-{int(rng.integers(spec.identifiers)):05d}".encode()
                count = int(rng.integers(1, min(spec.max_keywords, len(pool)) + 1))
                keywords = [pool[i] for i in rng.choice(len(pool), size=count, replace=False)]
                records.append((identifier, keywords))
            batch, w_delta = trustee.add_batch(records)
            batch = codec.decode_add_batch(codec.encode_add_batch(batch, ctx), ctx)
            server.apply_add(batch)
            vetter.sync(codec.decode_w_delta(codec.encode_w_delta(w_delta, ctx), ctx))
            for identifier, keywords in records:
                oracle.add(identifier, keywords)
                for keyword in keywords:
                    counters[keyword] = counters.get(keyword, 0) + 1
            report.adds += 1
            report.pairs_added += batch.pair_count
        elif op == "revoke":
            live = sorted(oracle.records)
            if live:
                revoke(step, live[int(rng.integers(len(live)))])
            else:
                revoke(step, b"id-never-added")
        else:
            search(step, pool[int(rng.integers(len(pool)))])

    if spec.revoke_all:
        step = len(ops)
        for identifier in sorted(oracle.records):
            revoke(step, identifier)
            step += 1
        for keyword in pool:
            search(step, keyword)
            step += 1

    report.final_index_size = server.index_size()
    logger.info(f"Workload seed {seed}: {report.adds} adds, {report.revokes} revokes, "
                f"{report.searches} searches, {len(report.divergences)} divergences")
    return report
