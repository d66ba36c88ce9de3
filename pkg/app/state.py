"""
State directory management for the CLI.

    <root>/config.json
    <root>/trustee/   <root>/vetter/   <root>/server/     one store per role
    <root>/audit/transcript.jsonl                         server-view transcript

The sqlite backend keeps each role in store.db; the memory backend loads and saves a
snapshot file (store.snap) around every command.
"""

import logging
from pathlib import Path
from typing import Optional

from src.config import CONFIG_FILENAME, AceConfig, load_config
from src.crypto_suite import RandomSource, SeededRandomSource, SystemRandomSource, get_group
from src.errors import StorageIOError
from src.storage import snapshot_export, snapshot_import
from src.storage.engine import KvStore, MemoryKvStore, open_store

logger = logging.getLogger(__name__)

ROLES = ("trustee", "vetter", "server")


class StateLayout:
    def __init__(self, root):
        self.root = Path(root)

    @property
    def config_path(self) -> Path:
        return self.root / CONFIG_FILENAME

    @property
    def transcript_path(self) -> Path:
        return self.root / "audit" / "transcript.jsonl"

    def role_dir(self, role: str) -> Path:
        return self.root / role

    def exists(self) -> bool:
        return self.config_path.exists()

    def create(self, config: AceConfig) -> None:
        if self.exists():
            raise StorageIOError(f"{self.root} already holds an ACE state")
        try:
            for role in ROLES:
                self.role_dir(role).mkdir(parents=True, exist_ok=True)
            self.transcript_path.parent.mkdir(parents=True, exist_ok=True)
            self.config_path.write_text(config.model_dump_json(indent=2), encoding="utf-8")
        except OSError as exc:
            raise StorageIOError(f"cannot create state in {self.root}: {exc}") from exc

    def load_config(self) -> AceConfig:
        if not self.exists():
            raise StorageIOError(f"{self.root} holds no ACE state; run setup first")
        return load_config(self.config_path.read_text(encoding="utf-8"))


class RoleStore:
    """Opens one role's store; for the memory backend, save() writes the snapshot back."""

    def __init__(self, layout: StateLayout, role: str, config: AceConfig):
        self.role = role
        self.config = config
        self.width = get_group(config.group).element_width
        directory = layout.role_dir(role)
        self.snapshot_path = directory / "store.snap"
        if config.storage_backend == "sqlite":
            self.store: KvStore = open_store("sqlite", directory / "store.db", self.width)
        elif self.snapshot_path.exists():
            self.store = snapshot_import(self.snapshot_path.read_bytes(), self.width)
        else:
            self.store = MemoryKvStore(self.width)

    def save(self) -> None:
        if self.config.storage_backend != "memory":
            return
        try:
            self.snapshot_path.write_bytes(snapshot_export(self.store))
        except OSError as exc:
            raise StorageIOError(f"cannot save {self.role} state: {exc}") from exc

    def close(self) -> None:
        self.store.close()


def command_rng(config: AceConfig, seed: Optional[int], label: str, nonce: int) -> RandomSource:
    """
    Randomness for one CLI command.

    An explicit --seed wins; otherwise a configured seed is combined with the command
    label and a per-state nonce so repeated commands never reuse a stream.
    """
    if seed is not None:
        return SeededRandomSource(f"{seed}:{label}:{nonce}")
    if config.seed is not None:
        return SeededRandomSource(f"{config.seed}:{label}:{nonce}")
    return SystemRandomSource()
