"""
Wire codec tests: roundtrips for every message type and rejection of damaged frames.
"""

import struct

import pytest
from Crypto.Hash import SHA256
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from src.errors import (
    BadMagicError, ChecksumMismatchError, TruncatedMessageError, UnknownMessageTypeError,
    WireFormatError,
)
from src.protocol import (
    AddBatch, DeleteToken, DeletionReport, DeltaRow, IndexEntry, SearchToken, WDelta, WDeltaEntry,
)
from src.wire import codec
from src.wire.codec import MessageType, WireContext

CTX = WireContext(element_width=32, perm_width=256)

delete_tokens = st.builds(DeleteToken, tag_id=st.integers(1, 2 ** 256 - 1),
                          r_id=st.binary(min_size=16, max_size=16))
search_tokens = st.builds(SearchToken, tk=st.binary(min_size=32, max_size=32),
                          st=st.integers(0, 2 ** 2048 - 1), c=st.integers(1, 2 ** 64 - 1))
index_entries = st.builds(IndexEntry, label=st.binary(min_size=32, max_size=32),
                          ciphertext=st.binary(max_size=64))
delta_rows = st.builds(DeltaRow, r_id=st.binary(min_size=16, max_size=16),
                       deltas=st.lists(st.binary(min_size=32, max_size=32), max_size=4))
add_batches = st.builds(AddBatch, entries=st.lists(index_entries, max_size=5),
                        rows=st.lists(delta_rows, max_size=3))
rsets = st.lists(st.binary(max_size=48), max_size=6)
w_delta_entries = st.builds(WDeltaEntry, keyword=st.text(min_size=1, max_size=24),
                            st=st.integers(0, 2 ** 2048 - 1), counter=st.integers(1, 2 ** 64 - 1),
                            previous_counter=st.integers(0, 2 ** 64 - 1))
w_deltas = st.builds(WDelta, sequence=st.integers(0, 2 ** 64 - 1),
                     entries=st.lists(w_delta_entries, max_size=4))
reports = st.builds(DeletionReport, removed_count=st.integers(0, 2 ** 64 - 1), row_removed=st.booleans())

CODECS = {
    "delete_token": (delete_tokens, codec.encode_delete_token, codec.decode_delete_token),
    "search_token": (search_tokens, codec.encode_search_token, codec.decode_search_token),
    "add_batch": (add_batches, codec.encode_add_batch, codec.decode_add_batch),
    "rset": (rsets, codec.encode_rset, codec.decode_rset),
    "w_delta": (w_deltas, codec.encode_w_delta, codec.decode_w_delta),
    "deletion_report": (reports, codec.encode_deletion_report, codec.decode_deletion_report),
}

FUZZ = settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def _frame(magic: bytes, msg_type: int, body: bytes) -> bytes:
    head = magic + bytes([msg_type]) + struct.pack(">I", len(body)) + body
    return head + SHA256.new(head).digest()


class TestRoundtrip:
    @pytest.mark.parametrize("name", sorted(CODECS))
    def test_roundtrip(self, name):
        strategy, encode, decode = CODECS[name]

        @FUZZ
        @given(strategy)
        def check(message):
            assert decode(encode(message, CTX), CTX) == message

        check()

    @pytest.mark.parametrize("name", sorted(CODECS))
    def test_every_single_byte_mutation_rejected(self, name):
        strategy, encode, decode = CODECS[name]

        @settings(max_examples=100, deadline=None)
        @given(strategy, st.data())
        def check(message, data):
            encoded = encode(message, CTX)
            index = data.draw(st.integers(0, len(encoded) - 1))
            flip = data.draw(st.integers(1, 255))
            mutated = bytearray(encoded)
            mutated[index] ^= flip
            with pytest.raises(ChecksumMismatchError):
                decode(bytes(mutated), CTX)

        check()

    def test_decode_message_dispatches(self):
        token = DeleteToken(tag_id=5, r_id=b"r" * 16)
        msg_type, decoded = codec.decode_message(codec.encode_delete_token(token))
        assert msg_type == MessageType.DELETE_TOKEN
        assert decoded == token


class TestFrameErrors:
    def test_truncated(self):
        encoded = codec.encode_deletion_report(DeletionReport(removed_count=1))
        with pytest.raises(TruncatedMessageError):
            codec.decode_deletion_report(encoded[:20])

    def test_bad_magic(self):
        with pytest.raises(BadMagicError):
            codec.decode_rset(_frame(b"XXXX", MessageType.RSET, struct.pack(">I", 0)))

    def test_unknown_type(self):
        with pytest.raises(UnknownMessageTypeError):
            codec.decode_message(_frame(b"ACE1", 0x09, b""))

    def test_wrong_expected_type(self):
        encoded = codec.encode_delete_token(DeleteToken(tag_id=5, r_id=b"r" * 16))
        with pytest.raises(WireFormatError):
            codec.decode_rset(encoded)

    def test_length_field_mismatch(self):
        head = b"ACE1" + bytes([MessageType.RSET]) + struct.pack(">I", 10) + struct.pack(">I", 0)
        with pytest.raises(TruncatedMessageError):
            codec.decode_rset(head + SHA256.new(head).digest())

    def test_trailing_body_bytes(self):
        body = struct.pack(">I", 0) + b"extra"
        with pytest.raises(WireFormatError):
            codec.decode_rset(_frame(b"ACE1", MessageType.RSET, body))

    def test_invalid_field_values(self):
        body = bytes(32) + b"r" * 16          # tag_ID of 0 is not in Z*_p
        with pytest.raises(WireFormatError):
            codec.decode_delete_token(_frame(b"ACE1", MessageType.DELETE_TOKEN, body))
        body = struct.pack(">QB", 1, 2)
        with pytest.raises(WireFormatError):
            codec.decode_deletion_report(_frame(b"ACE1", MessageType.DELETION_REPORT, body))

    def test_value_too_wide_for_context(self):
        narrow = WireContext(element_width=32, perm_width=4)
        with pytest.raises(WireFormatError):
            codec.encode_search_token(SearchToken(tk=b"t" * 32, st=2 ** 40, c=1), narrow)


class TestSizes:
    def test_delete_token_frame_is_constant(self):
        small = codec.encode_delete_token(DeleteToken(tag_id=1, r_id=b"\x00" * 16))
        large = codec.encode_delete_token(DeleteToken(tag_id=2 ** 255, r_id=b"\xff" * 16))
        assert len(small) == len(large) == codec.HEADER_WIDTH + 48 + 32
        assert codec.body_length(small) == 48

    def test_search_token_size_follows_context(self):
        ctx = WireContext(element_width=2, perm_width=128)
        token = SearchToken(tk=b"\x00\x04", st=7, c=3)
        assert codec.body_length(codec.encode_search_token(token, ctx)) == 2 + 128 + 8
