"""
Pydantic message models exchanged between the Trustee, Vetter and Data Server.
Group elements travel in their fixed-width encoding; permutation-domain values and
scalars travel as integers and are range-checked by the receiving role.
"""

from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.config import HASH_WIDTH, PRF_WIDTH


class _Message(BaseModel):
    model_config = ConfigDict(frozen=True)


def _exact_width(value: bytes, width: int, what: str) -> bytes:
    if len(value) != width:
        raise ValueError(f"{what} must be {width} bytes, got {len(value)}")
    return value


class SearchToken(_Message):
    """(tk = g^tag_w, ST_c, c) sent from the Vetter to the Data Server."""
    tk: bytes
    st: int = Field(ge=0)
    c: int = Field(ge=1)


class DeleteToken(_Message):
    """(tag_ID, r_ID): constant size whatever the identifier's keyword count."""
    tag_id: int = Field(ge=1)
    r_id: bytes

    @field_validator("r_id")
    @classmethod
    def _check_r_id(cls, value: bytes) -> bytes:
        return _exact_width(value, PRF_WIDTH, "r_ID")


class IndexEntry(_Message):
    label: bytes
    ciphertext: bytes

    @field_validator("label")
    @classmethod
    def _check_label(cls, value: bytes) -> bytes:
        return _exact_width(value, HASH_WIDTH, "label")


class DeltaRow(_Message):
    r_id: bytes
    deltas: List[bytes] = []

    @field_validator("r_id")
    @classmethod
    def _check_r_id(cls, value: bytes) -> bytes:
        return _exact_width(value, PRF_WIDTH, "r_ID")


class AddBatch(_Message):
    entries: List[IndexEntry] = []
    rows: List[DeltaRow] = []

    @property
    def pair_count(self) -> int:
        return len(self.entries)

    @property
    def is_empty(self) -> bool:
        return not self.entries and not self.rows


class KeywordState(_Message):
    """One entry of W: the newest chain value and how many pairs used the keyword."""
    keyword: str
    st: int = Field(ge=0)
    counter: int = Field(ge=1)


class WDeltaEntry(KeywordState):
    previous_counter: int = Field(ge=0)


class WDelta(_Message):
    sequence: int = Field(ge=0)
    entries: List[WDeltaEntry] = []


class DeletionReport(_Message):
    removed_count: int = Field(ge=0)
    row_removed: bool = False


class SearchOutcome(_Message):
    rset: List[bytes] = []
    iterations: int = 0
    skipped: int = 0

    @property
    def hits(self) -> int:
        return len(self.rset)
