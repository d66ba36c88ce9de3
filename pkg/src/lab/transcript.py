"""
Server-view transcripts and their audit.

RecordingServer wraps a DataServer and logs, with a logical timestamp, exactly the bytes
the server receives (encoded messages) and what it can observe while serving them
(row sizes, labels it removes, result counts). audit_transcript derives the leakage the
server can compute from that view: IDs and keywords per batch, add/delete histories,
search and result patterns, skipped slots, and the labels a deletion ties back to earlier
batches.
"""

import json
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel

from src.config import HASH_WIDTH, PRF_WIDTH
from src.protocol.models import AddBatch
from src.protocol.server import DataServer
from src.wire import codec

logger = logging.getLogger(__name__)

MIN_PLAINTEXT_SCAN = 4


class TranscriptEvent(BaseModel):
    timestamp: int
    kind: Literal["add", "del", "search"]
    payload: str                                # hex of the encoded message
    payload_bytes: int
    rows: Dict[str, int] = {}                   # add: r_ID hex -> deltas appended
    labels: List[str] = []                      # add: labels inserted; del: labels removed
    r_id: Optional[str] = None                  # del
    tk: Optional[str] = None                    # search
    counter: Optional[int] = None               # search: c
    hits: Optional[int] = None
    skipped: Optional[int] = None
    result_bytes: Optional[int] = None


class RecordingServer:
    """DataServer front that takes encoded messages and records the server's view."""

    def __init__(self, server: DataServer, events: Optional[List[TranscriptEvent]] = None,
                 start: int = 0):
        self.server = server
        self.ctx = codec.WireContext.from_public(server.public)
        self.events: List[TranscriptEvent] = events if events is not None else []
        self._clock = start

    def _tick(self) -> int:
        self._clock += 1
        return self._clock

    def check_add(self, message: bytes) -> AddBatch:
        batch = codec.decode_add_batch(message, self.ctx)
        self.server.check_add(batch)
        return batch

    def apply_add(self, message: bytes) -> AddBatch:
        batch = codec.decode_add_batch(message, self.ctx)
        self.server.apply_add(batch)
        self.events.append(TranscriptEvent(
            timestamp=self._tick(), kind="add", payload=message.hex(), payload_bytes=len(message),
            rows={row.r_id.hex(): len(row.deltas) for row in batch.rows},
            labels=[entry.label.hex() for entry in batch.entries]))
        return batch

    def apply_delete(self, message: bytes) -> bytes:
        token = codec.decode_delete_token(message, self.ctx)
        report, removed = self.server.delete_row(token)
        self.events.append(TranscriptEvent(
            timestamp=self._tick(), kind="del", payload=message.hex(), payload_bytes=len(message),
            r_id=token.r_id.hex(), labels=[label.hex() for label in removed]))
        return codec.encode_deletion_report(report, self.ctx)

    def search(self, message: bytes) -> bytes:
        token = codec.decode_search_token(message, self.ctx)
        outcome = self.server.search(token)
        encoded = codec.encode_rset(outcome.rset, self.ctx)
        self.events.append(TranscriptEvent(
            timestamp=self._tick(), kind="search", payload=message.hex(), payload_bytes=len(message),
            tk=token.tk.hex(), counter=token.c, hits=outcome.hits, skipped=outcome.skipped,
            result_bytes=len(encoded)))
        return encoded


def write_transcript(events: Iterable[TranscriptEvent], path: Union[str, Path]) -> None:
    with open(path, "a", encoding="utf-8") as handle:
        for event in events:
            handle.write(event.model_dump_json() + "\n")


def read_transcript(path: Union[str, Path]) -> List[TranscriptEvent]:
    path = Path(path)
    if not path.exists():
        return []
    with open(path, encoding="utf-8") as handle:
        return [TranscriptEvent.model_validate(json.loads(line)) for line in handle if line.strip()]


class AuditReport(BaseModel):
    events: int = 0
    ids_per_batch: Dict[int, int] = {}                     # N_ID per add timestamp
    keywords_per_id: Dict[int, List[int]] = {}             # NW_ID per add timestamp
    add_history: Dict[str, List[int]] = {}                 # r_ID -> add timestamps
    delete_history: List[Tuple[str, int, int]] = []        # (r_ID, add u, del u)
    search_pattern: Dict[str, List[int]] = {}              # tk -> search timestamps
    result_pattern: List[Tuple[int, int]] = []             # (search u, hits)
    skipped_tokens: Dict[int, int] = {}                    # search u -> skipped slots
    deletion_links: List[Tuple[int, int, int]] = []        # (del u, add u, labels unlinked)
    violations: List[str] = []

    def findings(self) -> List[str]:
        lines = []
        for u, n in sorted(self.ids_per_batch.items()):
            lines.append(f"N_ID u={u} ids={n} keywords_per_id={self.keywords_per_id.get(u, [])}")
        for r_id, stamps in sorted(self.add_history.items()):
            lines.append(f"ADD_HIST r_id={r_id[:16]} adds={stamps}")
        for r_id, added, deleted in self.delete_history:
            lines.append(f"DEL_HIST r_id={r_id[:16]} add_u={added} del_u={deleted}")
        for tk, stamps in sorted(self.search_pattern.items()):
            lines.append(f"SEARCH_PATTERN tk={tk[:16]} searches={stamps}")
        for u, hits in self.result_pattern:
            lines.append(f"RESULT_PATTERN u={u} hits={hits} skipped={self.skipped_tokens.get(u, 0)}")
        for deleted, added, count in self.deletion_links:
            lines.append(f"DEL_INDEX del_u={deleted} add_u={added} labels={count}")
        lines += [f"VIOLATION {v}" for v in self.violations]
        return lines


def _expected_add_bytes(event: TranscriptEvent, element_width: int) -> int:
    """Frame size implied by the counts alone; ciphertext lengths are read off the payload."""
    batch = codec.decode_add_batch(bytes.fromhex(event.payload), codec.WireContext(element_width=element_width))
    entries = sum(HASH_WIDTH + 4 + len(e.ciphertext) for e in batch.entries)
    rows = sum(PRF_WIDTH + 4 + element_width * len(r.deltas) for r in batch.rows)
    return codec.HEADER_WIDTH + 4 + entries + 4 + rows + codec.CHECKSUM_WIDTH


def audit_transcript(events: Iterable[TranscriptEvent], element_width: int = 32,
                     plaintexts: Iterable[bytes] = ()) -> AuditReport:
    events = sorted(events, key=lambda e: e.timestamp)
    report = AuditReport(events=len(events))
    label_origin: Dict[str, int] = {}
    add_history = defaultdict(list)
    search_pattern = defaultdict(list)
    sizes = defaultdict(set)

    for event in events:
        sizes[event.kind].add(event.payload_bytes)
        if event.kind == "add":
            report.ids_per_batch[event.timestamp] = len(event.rows)
            report.keywords_per_id[event.timestamp] = sorted(event.rows.values())
            for r_id in event.rows:
                add_history[r_id].append(event.timestamp)
            for label in event.labels:
                label_origin[label] = event.timestamp
            if _expected_add_bytes(event, element_width) != event.payload_bytes:
                report.violations.append(f"add u={event.timestamp} carries bytes beyond its entries")
            if len(event.labels) != sum(event.rows.values()):
                report.violations.append(f"add u={event.timestamp} has entry/delta count mismatch")
        elif event.kind == "del":
            for added in add_history.get(event.r_id, []):
                report.delete_history.append((event.r_id, added, event.timestamp))
            add_history.pop(event.r_id, None)
            links = defaultdict(int)
            for label in event.labels:
                if label in label_origin:
                    links[label_origin.pop(label)] += 1
            report.deletion_links += [(event.timestamp, added, n) for added, n in sorted(links.items())]
        else:
            search_pattern[event.tk].append(event.timestamp)
            report.result_pattern.append((event.timestamp, event.hits))
            report.skipped_tokens[event.timestamp] = event.skipped
            if event.skipped != event.counter - event.hits:
                report.violations.append(f"search u={event.timestamp} skipped count inconsistent")

    report.add_history = {r_id: stamps for r_id, stamps in add_history.items()}
    report.search_pattern = dict(search_pattern)
    for kind in ("del", "search"):
        if len(sizes[kind]) > 1:
            report.violations.append(f"{kind} messages vary in size: {sorted(sizes[kind])}")

    needles = [p for p in plaintexts if len(p) >= MIN_PLAINTEXT_SCAN]
    for event in events:
        payload = bytes.fromhex(event.payload)
        for needle in needles:
            if needle in payload:
                report.violations.append(f"plaintext visible in {event.kind} u={event.timestamp}")
    logger.info(f"Audited {len(events)} events, {len(report.violations)} violations")
    return report
