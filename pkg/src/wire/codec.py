"""
Wire encodings for the messages exchanged between roles.

Frame: "ACE1" | type (1 byte) | body length (u32) | body | SHA-256 of everything before it.
All integers are big-endian and fixed width. The checksum is verified before anything
else in the frame is interpreted.
"""

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Dict, List, Optional, Tuple

from Crypto.Hash import SHA256
from pydantic import ValidationError

from src.config import CHECKSUM_WIDTH, HASH_WIDTH, MAX_KEYWORD_BYTES, PRF_WIDTH, SCALAR_WIDTH, WIRE_MAGIC
from src.errors import (
    BadMagicError, ChecksumMismatchError, TruncatedMessageError, UnknownMessageTypeError,
    WireFormatError,
)
from src.protocol.models import (
    AddBatch, DeleteToken, DeletionReport, DeltaRow, IndexEntry, SearchToken, WDelta, WDeltaEntry,
)

HEADER_WIDTH = len(WIRE_MAGIC) + 1 + 4


class MessageType(IntEnum):
    ADD_BATCH = 0x01
    DELETE_TOKEN = 0x02
    SEARCH_TOKEN = 0x03
    RSET = 0x04
    W_DELTA = 0x05
    DELETION_REPORT = 0x06


@dataclass(frozen=True)
class WireContext:
    """Widths that depend on the deployment: group elements and permutation values."""
    element_width: int = 32
    perm_width: int = 256

    @classmethod
    def from_public(cls, public) -> "WireContext":
        return cls(public.group.element_width, public.perm_width)


DEFAULT_CONTEXT = WireContext()


# --- framing ---

def frame(msg_type: MessageType, body: bytes) -> bytes:
    head = WIRE_MAGIC + bytes([msg_type]) + struct.pack(">I", len(body)) + body
    return head + SHA256.new(head).digest()


def unframe(data: bytes, expected: Optional[MessageType] = None) -> Tuple[MessageType, bytes]:
    data = bytes(data)
    if len(data) < HEADER_WIDTH + CHECKSUM_WIDTH:
        raise TruncatedMessageError(f"message of {len(data)} bytes is shorter than a frame")
    head, checksum = data[:-CHECKSUM_WIDTH], data[-CHECKSUM_WIDTH:]
    if SHA256.new(head).digest() != checksum:
        raise ChecksumMismatchError("message checksum mismatch")
    if head[:len(WIRE_MAGIC)] != WIRE_MAGIC:
        raise BadMagicError("not an ACE message")
    try:
        msg_type = MessageType(head[len(WIRE_MAGIC)])
    except ValueError:
        raise UnknownMessageTypeError(f"unknown message type {head[len(WIRE_MAGIC)]:#04x}") from None
    (length,) = struct.unpack(">I", head[len(WIRE_MAGIC) + 1:HEADER_WIDTH])
    body = head[HEADER_WIDTH:]
    if length != len(body):
        raise TruncatedMessageError(f"body length field says {length}, frame carries {len(body)}")
    if expected is not None and msg_type != expected:
        raise WireFormatError(f"expected {expected.name}, got {msg_type.name}")
    return msg_type, body


class _Reader:
    def __init__(self, body: bytes):
        self.body = body
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.body):
            raise TruncatedMessageError("body ends early")
        chunk = self.body[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def integer(self, width: int) -> int:
        return int.from_bytes(self.take(width), "big")

    def finish(self) -> None:
        if self.pos != len(self.body):
            raise WireFormatError(f"{len(self.body) - self.pos} trailing bytes in body")


def _fixed(value: int, width: int, what: str) -> bytes:
    try:
        return value.to_bytes(width, "big")
    except OverflowError:
        raise WireFormatError(f"{what} does not fit in {width} bytes") from None


def _build(factory, **fields):
    try:
        return factory(**fields)
    except ValidationError as exc:
        raise WireFormatError(f"invalid {factory.__name__}: {exc.errors()[0]['msg']}") from exc


# --- DeleteToken: tag_ID (32) | r_ID (16) ---

def encode_delete_token(token: DeleteToken, ctx: WireContext = DEFAULT_CONTEXT) -> bytes:
    return frame(MessageType.DELETE_TOKEN, _fixed(token.tag_id, SCALAR_WIDTH, "tag_ID") + token.r_id)


def decode_delete_token(data: bytes, ctx: WireContext = DEFAULT_CONTEXT) -> DeleteToken:
    reader = _Reader(unframe(data, MessageType.DELETE_TOKEN)[1])
    tag_id = reader.integer(SCALAR_WIDTH)
    r_id = reader.take(PRF_WIDTH)
    reader.finish()
    return _build(DeleteToken, tag_id=tag_id, r_id=r_id)


# --- SearchToken: tk (element width) | ST (perm width) | c (u64) ---

def encode_search_token(token: SearchToken, ctx: WireContext = DEFAULT_CONTEXT) -> bytes:
    if len(token.tk) != ctx.element_width:
        raise WireFormatError(f"tk must be {ctx.element_width} bytes")
    body = token.tk + _fixed(token.st, ctx.perm_width, "ST") + struct.pack(">Q", token.c)
    return frame(MessageType.SEARCH_TOKEN, body)


def decode_search_token(data: bytes, ctx: WireContext = DEFAULT_CONTEXT) -> SearchToken:
    reader = _Reader(unframe(data, MessageType.SEARCH_TOKEN)[1])
    tk = reader.take(ctx.element_width)
    st = reader.integer(ctx.perm_width)
    c = reader.u64()
    reader.finish()
    return _build(SearchToken, tk=tk, st=st, c=c)


# --- AddBatch ---
# u32 entry count, entries: label (32) | u32 ciphertext length | ciphertext
# u32 row count, rows: r_ID (16) | u32 delta count | deltas (element width each)

def encode_add_batch(batch: AddBatch, ctx: WireContext = DEFAULT_CONTEXT) -> bytes:
    parts = [struct.pack(">I", len(batch.entries))]
    for entry in batch.entries:
        parts += [entry.label, struct.pack(">I", len(entry.ciphertext)), entry.ciphertext]
    parts.append(struct.pack(">I", len(batch.rows)))
    for row in batch.rows:
        parts += [row.r_id, struct.pack(">I", len(row.deltas))]
        for delta in row.deltas:
            if len(delta) != ctx.element_width:
                raise WireFormatError(f"delta must be {ctx.element_width} bytes")
            parts.append(delta)
    return frame(MessageType.ADD_BATCH, b"".join(parts))


def decode_add_batch(data: bytes, ctx: WireContext = DEFAULT_CONTEXT) -> AddBatch:
    reader = _Reader(unframe(data, MessageType.ADD_BATCH)[1])
    entries = []
    for _ in range(reader.u32()):
        label = reader.take(HASH_WIDTH)
        entries.append(_build(IndexEntry, label=label, ciphertext=reader.take(reader.u32())))
    rows = []
    for _ in range(reader.u32()):
        r_id = reader.take(PRF_WIDTH)
        deltas = [reader.take(ctx.element_width) for _ in range(reader.u32())]
        rows.append(_build(DeltaRow, r_id=r_id, deltas=deltas))
    reader.finish()
    return _build(AddBatch, entries=entries, rows=rows)


# --- RSet: u32 count, each u32 length | ciphertext ---

def encode_rset(rset: List[bytes], ctx: WireContext = DEFAULT_CONTEXT) -> bytes:
    parts = [struct.pack(">I", len(rset))]
    for ciphertext in rset:
        parts += [struct.pack(">I", len(ciphertext)), ciphertext]
    return frame(MessageType.RSET, b"".join(parts))


def decode_rset(data: bytes, ctx: WireContext = DEFAULT_CONTEXT) -> List[bytes]:
    reader = _Reader(unframe(data, MessageType.RSET)[1])
    rset = [reader.take(reader.u32()) for _ in range(reader.u32())]
    reader.finish()
    return rset


# --- WDelta ---
# u64 sequence, u32 entry count,
# entries: u16 keyword length | keyword (UTF-8) | ST (perm width) | c (u64) | previous c (u64)

def encode_w_delta(delta: WDelta, ctx: WireContext = DEFAULT_CONTEXT) -> bytes:
    parts = [struct.pack(">QI", delta.sequence, len(delta.entries))]
    for entry in delta.entries:
        keyword = entry.keyword.encode("utf-8")
        if len(keyword) > MAX_KEYWORD_BYTES:
            raise WireFormatError("keyword longer than 65535 bytes")
        parts += [struct.pack(">H", len(keyword)), keyword, _fixed(entry.st, ctx.perm_width, "ST"),
                  struct.pack(">QQ", entry.counter, entry.previous_counter)]
    return frame(MessageType.W_DELTA, b"".join(parts))


def decode_w_delta(data: bytes, ctx: WireContext = DEFAULT_CONTEXT) -> WDelta:
    reader = _Reader(unframe(data, MessageType.W_DELTA)[1])
    sequence = reader.u64()
    entries = []
    for _ in range(reader.u32()):
        try:
            keyword = reader.take(reader.u16()).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise WireFormatError("keyword is not UTF-8") from exc
        st = reader.integer(ctx.perm_width)
        counter = reader.u64()
        previous = reader.u64()
        entries.append(_build(WDeltaEntry, keyword=keyword, st=st, counter=counter,
                              previous_counter=previous))
    reader.finish()
    return _build(WDelta, sequence=sequence, entries=entries)


# --- DeletionReport: removed count (u64) | row-removed flag (u8) ---

def encode_deletion_report(report: DeletionReport, ctx: WireContext = DEFAULT_CONTEXT) -> bytes:
    body = struct.pack(">QB", report.removed_count, int(report.row_removed))
    return frame(MessageType.DELETION_REPORT, body)


def decode_deletion_report(data: bytes, ctx: WireContext = DEFAULT_CONTEXT) -> DeletionReport:
    reader = _Reader(unframe(data, MessageType.DELETION_REPORT)[1])
    removed = reader.u64()
    flag = reader.u8()
    reader.finish()
    if flag > 1:
        raise WireFormatError("row-removed flag must be 0 or 1")
    return _build(DeletionReport, removed_count=removed, row_removed=bool(flag))


_DECODERS: Dict[MessageType, Callable] = {
    MessageType.ADD_BATCH: decode_add_batch,
    MessageType.DELETE_TOKEN: decode_delete_token,
    MessageType.SEARCH_TOKEN: decode_search_token,
    MessageType.RSET: decode_rset,
    MessageType.W_DELTA: decode_w_delta,
    MessageType.DELETION_REPORT: decode_deletion_report,
}


def decode_message(data: bytes, ctx: WireContext = DEFAULT_CONTEXT):
    """Decode any frame; returns (type, message)."""
    msg_type, _ = unframe(data)
    return msg_type, _DECODERS[msg_type](data, ctx)


def body_length(data: bytes) -> int:
    return len(data) - HEADER_WIDTH - CHECKSUM_WIDTH
