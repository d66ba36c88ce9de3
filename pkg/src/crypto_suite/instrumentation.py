"""
Primitive-call counters.
Primitives call record(); counts land in whichever OpCounters scope is active in the
current context, so concurrent searches on different threads never mix their counts.
"""

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import asdict, dataclass
from typing import Dict, Iterator, Optional


@dataclass
class OpCounters:
    prf_calls: int = 0
    scalar_prf_calls: int = 0
    group_exps: int = 0
    perm_inverses: int = 0
    perm_forwards: int = 0
    hashes: int = 0
    encryptions: int = 0
    decryptions: int = 0

    def as_dict(self) -> Dict[str, int]:
        return asdict(self)

    def total_prfs(self) -> int:
        return self.prf_calls + self.scalar_prf_calls


_active: ContextVar[Optional[OpCounters]] = ContextVar("ace_op_counters", default=None)


def record(kind: str) -> None:
    counters = _active.get()
    if counters is not None:
        setattr(counters, kind, getattr(counters, kind) + 1)


@contextmanager
def count_operations() -> Iterator[OpCounters]:
    """Open a fresh counter scope; counts are zero at entry and only grow inside it."""
    counters = OpCounters()
    token = _active.set(counters)
    try:
        yield counters
    finally:
        _active.reset(token)
