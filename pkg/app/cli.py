"""
Command-line surface for ACE.
One handler per subcommand; every message between roles goes through the wire codec.
Library errors become a one-line message on stderr and exit code 1.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from src.config import DEFAULT_PERM_BITS, MIN_SECURITY_BITS, load_config
from src.crypto_suite import SeededRandomSource, SystemRandomSource, get_group
from src.errors import AceError
from src.lab import (
    BenchGrid, BenchRunner, RecordingServer, audit_transcript, plot_bench, read_transcript,
    write_bench_csv, write_transcript,
)
from src.lab.bench import SCENARIOS
from src.protocol import DataServer, Trustee, Vetter, setup
from src.protocol.wmap import read_sequence
from src.storage import storage_metrics
from src.wire import canonicalize_keyword, codec, ingest_dataset

from app.schemas import AddSummary, RevokeSummary, ServerStatsResponse, SetupSummary
from app.state import RoleStore, StateLayout, command_rng

logger = logging.getLogger(__name__)


def _status(message: str) -> None:
    print(f"✅ {message}", file=sys.stderr)


class Session:
    """Opened role stores of one state directory, saved and closed together."""

    def __init__(self, root: str, roles=("trustee", "vetter", "server")):
        self.layout = StateLayout(root)
        self.config = self.layout.load_config()
        self.stores = {role: RoleStore(self.layout, role, self.config) for role in roles}
        self.events = read_transcript(self.layout.transcript_path) if self.config.record_transcript else []
        self._recorded = len(self.events)

    def store(self, role: str):
        return self.stores[role].store

    def server_front(self) -> RecordingServer:
        return RecordingServer(DataServer.open(self.store("server")), events=self.events,
                               start=self.events[-1].timestamp if self.events else 0)

    def close(self, save: bool = True) -> None:
        if save:
            for role_store in self.stores.values():
                role_store.save()
            if self.config.record_transcript and len(self.events) > self._recorded:
                write_transcript(self.events[self._recorded:], self.layout.transcript_path)
        for role_store in self.stores.values():
            role_store.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, *_):
        self.close(save=exc_type is None)


# --- handlers ---

def cmd_setup(args) -> int:
    config = load_config(security_bits=args.security, group=args.group, perm_modulus_bits=args.perm_bits,
                         storage_backend=args.backend, seed=args.seed,
                         record_transcript=not args.no_transcript)
    layout = StateLayout(args.out)
    layout.create(config)
    stores = {role: RoleStore(layout, role, config) for role in ("trustee", "vetter", "server")}
    rng = SeededRandomSource(f"{args.seed}:setup:0") if args.seed is not None else SystemRandomSource()
    try:
        setup(config.security_bits, rng, group=config.group, modulus_bits=config.perm_modulus_bits,
              trustee_store=stores["trustee"].store, vetter_store=stores["vetter"].store,
              server_store=stores["server"].store)
        for role_store in stores.values():
            role_store.save()
    finally:
        for role_store in stores.values():
            role_store.close()
    summary = SetupSummary(root=str(layout.root), group=config.group,
                           perm_modulus_bits=config.perm_modulus_bits, storage_backend=config.storage_backend)
    _status(f"Created ACE state in {summary.root} ({summary.group}, {summary.storage_backend})")
    return 0


def cmd_trustee_add(args) -> int:
    records = ingest_dataset(args.input)
    with Session(args.db) as session:
        store = session.store("trustee")
        rng = command_rng(session.config, args.seed, "add", read_sequence(store))
        trustee = Trustee.open(store, rng)
        vetter = Vetter.open(session.store("vetter"))
        server = session.server_front()
        ctx = server.ctx

        # Nothing is committed until both messages encode and every role has accepted them.
        prepared = trustee.prepare_batch([record.as_pair() for record in records])
        batch = prepared.batch
        message = codec.encode_add_batch(batch, ctx)
        w_delta = codec.decode_w_delta(codec.encode_w_delta(prepared.w_delta, ctx), ctx)
        if not batch.is_empty:
            server.check_add(message)
        vetter.check_sync(w_delta)

        # W first: a failed server write leaves both W copies equal; searches skip its slots.
        trustee.commit(prepared)
        vetter.sync(w_delta)
        if not batch.is_empty:
            server.apply_add(message)

    summary = AddSummary(records=len(records), pairs=batch.pair_count,
                         keywords=len(w_delta.entries), message_bytes=len(message))
    _status(f"Added {summary.records} records ({summary.pairs} pairs, {summary.keywords} keywords)")
    return 0


def cmd_trustee_revoke(args) -> int:
    with Session(args.db, roles=("trustee", "server")) as session:
        trustee = Trustee.open(session.store("trustee"))
        server = session.server_front()
        message = codec.encode_delete_token(trustee.issue_delete(args.id.strip().encode("utf-8")), server.ctx)
        report = codec.decode_deletion_report(server.apply_delete(message), server.ctx)

    summary = RevokeSummary(removed_count=report.removed_count, row_removed=report.row_removed,
                            token_bytes=len(message))
    if summary.row_removed:
        _status(f"Revoked {args.id}: removed {summary.removed_count} index entries")
    else:
        _status(f"Nothing stored for {args.id}; no entries removed")
    return 0


def cmd_vetter_search(args) -> int:
    keyword = canonicalize_keyword(args.keyword)
    with Session(args.db, roles=("vetter", "server")) as session:
        vetter = Vetter.open(session.store("vetter"))
        token = vetter.issue_search(keyword)
        if token is None:
            identifiers = set()
        else:
            server = session.server_front()
            reply = server.search(codec.encode_search_token(token, server.ctx))
            identifiers = vetter.decrypt_results(keyword, codec.decode_rset(reply, server.ctx))

    for identifier in sorted(identifiers):
        print(identifier.decode("utf-8", errors="replace"))
    return 0


def cmd_server_stats(args) -> int:
    with Session(args.db) as session:
        stats = ServerStatsResponse(
            group=session.config.group,
            storage_backend=session.config.storage_backend,
            server=storage_metrics(session.store("server")),
            vetter_w_bytes=storage_metrics(session.store("vetter")).wmap_bytes,
            trustee_w_bytes=storage_metrics(session.store("trustee")).wmap_bytes,
            transcript_events=len(session.events),
        )
    print(stats.model_dump_json(indent=2))
    return 0


def cmd_bench(args) -> int:
    grid = BenchGrid.quick() if args.quick else BenchGrid()
    out = Path(args.out)
    runner = BenchRunner(seed=args.seed, grid=grid, workdir=out.parent)
    rows = runner.run(args.scenario)
    write_bench_csv(rows, out)
    if args.plot:
        plot_bench(rows, args.plot)
    _status(f"Wrote {len(rows)} bench rows to {out}")
    return 0


def cmd_audit_transcript(args) -> int:
    layout = StateLayout(args.db)
    config = layout.load_config()
    plaintexts = []
    if args.dataset:
        for record in ingest_dataset(args.dataset):
            plaintexts.append(record.id_bytes)
            plaintexts.extend(keyword.encode("utf-8") for keyword in record.keywords)
    report = audit_transcript(read_transcript(layout.transcript_path),
                              element_width=get_group(config.group).element_width, plaintexts=plaintexts)
    lines = report.findings()
    if args.out:
        Path(args.out).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
        _status(f"Wrote {len(lines)} findings to {args.out}")
    else:
        for line in lines:
            print(line)
    return 0 if not report.violations else 1


# --- parser ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ace", description="Consent-embedded searchable encryption")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("setup", help="create trustee/vetter/server state")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--security", type=int, default=MIN_SECURITY_BITS)
    p.add_argument("--group", choices=["ed25519", "modp-toy"], default="ed25519")
    p.add_argument("--perm-bits", type=int, default=DEFAULT_PERM_BITS)
    p.add_argument("--backend", choices=["sqlite", "memory"], default="sqlite")
    p.add_argument("--no-transcript", action="store_true")
    p.set_defaults(handler=cmd_setup)

    trustee = commands.add_parser("trustee").add_subparsers(dest="action", required=True)
    p = trustee.add_parser("add", help="index a CSV dataset")
    p.add_argument("--db", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_trustee_add)
    p = trustee.add_parser("revoke", help="delete everything stored for an ID")
    p.add_argument("--db", required=True)
    p.add_argument("--id", required=True)
    p.set_defaults(handler=cmd_trustee_revoke)

    vetter = commands.add_parser("vetter").add_subparsers(dest="action", required=True)
    p = vetter.add_parser("search", help="print the IDs holding a keyword")
    p.add_argument("--db", required=True)
    p.add_argument("--keyword", required=True)
    p.set_defaults(handler=cmd_vetter_search)

    server = commands.add_parser("server").add_subparsers(dest="action", required=True)
    p = server.add_parser("stats", help="storage metrics as JSON")
    p.add_argument("--db", required=True)
    p.set_defaults(handler=cmd_server_stats)

    p = commands.add_parser("bench", help="run benchmark scenarios")
    p.add_argument("scenario", choices=list(SCENARIOS) + ["all"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--plot")
    p.add_argument("--quick", action="store_true")
    p.set_defaults(handler=cmd_bench)

    audit = commands.add_parser("audit").add_subparsers(dest="action", required=True)
    p = audit.add_parser("transcript", help="leakage findings from the server transcript")
    p.add_argument("--db", required=True)
    p.add_argument("--out")
    p.add_argument("--dataset", help="CSV whose IDs and keywords must not appear in the transcript")
    p.set_defaults(handler=cmd_audit_transcript)
    return parser


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except AceError as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return 1
