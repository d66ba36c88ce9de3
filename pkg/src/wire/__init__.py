"""
Wire encodings and genomic dataset ingestion.
"""

from .codec import (
    MessageType, WireContext, decode_add_batch, decode_delete_token, decode_deletion_report,
    decode_message, decode_rset, decode_search_token, decode_w_delta, encode_add_batch,
    encode_delete_token, encode_deletion_report, encode_rset, encode_search_token, encode_w_delta,
)
from .ingest import GenomicRecord, canonicalize_keyword, ingest_dataset, parse_rows, write_dataset_csv
from .synthetic import PLANTED_KEYWORD, generate_dataset
