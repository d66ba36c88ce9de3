"""
Genomic dataset ingestion.

CSV layout: a header row naming the fields, identifier in the first column. Every other
non-empty cell becomes the keyword "field:value" (field lowercased, both parts trimmed).
A column named "keywords" instead holds a semicolon-separated list of keywords, e.g.

    id,keywords
    ID1,w1;w2
"""

import csv
import logging
from pathlib import Path
from typing import Iterable, Iterator, List, Union

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from src.config import MAX_KEYWORD_BYTES
from src.errors import IngestionError

logger = logging.getLogger(__name__)

KEYWORDS_COLUMN = "keywords"


def canonicalize_keyword(raw: str) -> str:
    """Trim; for "field:value" also lowercase the field. Idempotent."""
    text = raw.strip()
    field, sep, value = text.partition(":")
    if not sep or not field.strip():
        return text
    return f"{field.strip().lower()}:{value.strip()}"


class GenomicRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    identifier: str
    keywords: List[str]

    @field_validator("identifier")
    @classmethod
    def _check_identifier(cls, value: str) -> str:
        value = value.strip()
        if not value:
            raise ValueError("identifier must be nonempty")
        return value

    @field_validator("keywords")
    @classmethod
    def _check_keywords(cls, value: List[str]) -> List[str]:
        canonical = [canonicalize_keyword(kw) for kw in value]
        canonical = list(dict.fromkeys(kw for kw in canonical if kw))
        if not canonical:
            raise ValueError("record has no keywords")
        if any(len(kw.encode("utf-8")) > MAX_KEYWORD_BYTES for kw in canonical):
            raise ValueError(f"keyword longer than {MAX_KEYWORD_BYTES} bytes")
        return canonical

    @property
    def id_bytes(self) -> bytes:
        return self.identifier.encode("utf-8")

    def as_pair(self):
        return self.id_bytes, self.keywords


def _row_keywords(header: List[str], cells: List[str]) -> List[str]:
    keywords = []
    for field, cell in zip(header[1:], cells[1:]):
        cell = cell.strip()
        if not cell:
            continue
        if field == KEYWORDS_COLUMN:
            keywords.extend(part for part in cell.split(";") if part.strip())
        else:
            keywords.append(f"{field}:{cell}")
    return keywords


def _read_rows(reader) -> Iterator[List[str]]:
    while True:
        try:
            yield next(reader)
        except StopIteration:
            return
        except csv.Error as exc:
            raise IngestionError(f"malformed CSV: {exc}", line=reader.line_num) from exc


def _decoded_lines(handle) -> Iterator[str]:
    for number, raw in enumerate(handle, start=1):
        try:
            yield raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise IngestionError("not valid UTF-8", line=number) from exc


def parse_rows(lines: Iterable[str]) -> List[GenomicRecord]:
    reader = csv.reader(lines, strict=True)
    rows = _read_rows(reader)
    try:
        header = next(rows)
    except StopIteration:
        raise IngestionError("dataset is empty", line=1) from None
    header = [name.strip().lower() for name in header]
    if len(header) < 2 or not all(header):
        raise IngestionError("header needs an ID column and at least one named field", line=1)

    records: List[GenomicRecord] = []
    seen = set()
    for cells in rows:
        line = reader.line_num
        if not cells or not any(cell.strip() for cell in cells):
            continue
        if len(cells) != len(header):
            raise IngestionError(f"expected {len(header)} cells, found {len(cells)}", line=line)
        identifier = cells[0].strip()
        if not identifier:
            raise IngestionError("missing identifier", line=line)
        if identifier in seen:
            raise IngestionError("duplicate identifier", line=line)
        try:
            record = GenomicRecord(identifier=identifier, keywords=_row_keywords(header, cells))
        except ValidationError as exc:
            raise IngestionError(exc.errors()[0]["msg"].removeprefix("Value error, "), line=line) from exc
        seen.add(identifier)
        records.append(record)
    return records


def ingest_dataset(path: Union[str, Path], fmt: str = "csv") -> List[GenomicRecord]:
    if fmt != "csv":
        raise IngestionError(f"unsupported dataset format {fmt!r}")
    try:
        with open(path, "rb") as handle:
            records = parse_rows(_decoded_lines(handle))
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    pairs = sum(len(r.keywords) for r in records)
    logger.info(f"Ingested {len(records)} records ({pairs} keyword pairs) from {path}")
    return records


def write_dataset_csv(records: Iterable[GenomicRecord], path: Union[str, Path]) -> int:
    """Write records in the id,keywords layout; returns the file size in bytes."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", KEYWORDS_COLUMN])
        for record in records:
            writer.writerow([record.identifier, ";".join(record.keywords)])
    return path.stat().st_size
