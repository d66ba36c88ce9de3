"""
Protocol core: the Trustee, Vetter and Data Server roles.
"""

from .keys import KeyMaterial, PublicParams, VetterKeys
from .models import (
    AddBatch, DeleteToken, DeletionReport, DeltaRow, IndexEntry, KeywordState, SearchOutcome,
    SearchToken, WDelta, WDeltaEntry,
)
from .server import DataServer
from .setup import generate_keys, setup
from .trustee import PreparedBatch, Trustee
from .vetter import QueryPolicy, Vetter, allow_all
from .wmap import snapshot_w
