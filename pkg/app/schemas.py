"""
Pydantic output models for the ACE command line.
"""

from pydantic import BaseModel

from src.storage import StorageMetrics


class SetupSummary(BaseModel):
    root: str
    group: str
    perm_modulus_bits: int
    storage_backend: str


class AddSummary(BaseModel):
    records: int
    pairs: int
    keywords: int
    message_bytes: int


class RevokeSummary(BaseModel):
    removed_count: int
    row_removed: bool
    token_bytes: int


class ServerStatsResponse(BaseModel):
    group: str
    storage_backend: str
    server: StorageMetrics
    vetter_w_bytes: int
    trustee_w_bytes: int
    transcript_events: int

