"""
Plaintext reference database: ID -> keyword set, with revocation removing the ID.
"""

from typing import Dict, Iterable, Set


class PlainDatabase:
    def __init__(self):
        self.records: Dict[bytes, Set[str]] = {}

    def add(self, identifier: bytes, keywords: Iterable[str]) -> None:
        self.records.setdefault(bytes(identifier), set()).update(keywords)

    def revoke(self, identifier: bytes) -> None:
        self.records.pop(bytes(identifier), None)

    def apply(self, op: str, identifier: bytes, keywords: Iterable[str] = ()) -> None:
        if op == "add":
            self.add(identifier, keywords)
        elif op == "revoke":
            self.revoke(identifier)
        else:
            raise ValueError(f"unknown oracle operation {op!r}")

    def search(self, keyword: str) -> Set[bytes]:
        return {identifier for identifier, keywords in self.records.items() if keyword in keywords}

    def keywords(self) -> Set[str]:
        return set().union(*self.records.values()) if self.records else set()

    def __contains__(self, identifier: bytes) -> bool:
        return bytes(identifier) in self.records

    def __len__(self) -> int:
        return len(self.records)


def oracle_apply(db: PlainDatabase, op: str, identifier: bytes, keywords: Iterable[str] = ()) -> None:
    db.apply(op, identifier, keywords)


def oracle_search(db: PlainDatabase, keyword: str) -> Set[bytes]:
    return db.search(keyword)
