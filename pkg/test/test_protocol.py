"""
Tests for the Trustee, Vetter and Data Server roles.
"""

import pytest

from conftest import EXAMPLE_RECORDS
from src.crypto_suite import SeededRandomSource, count_operations
from src.errors import (
    AuthorizationError, DuplicateLabelFault, MalformedTokenError, ProtocolError,
    ResultIntegrityError, StalenessError, ZeroResidueFault,
)
from src.lab import ChainRecorder, KeyHoldingHarness
from src.protocol import DeleteToken, SearchToken, WDelta, setup, snapshot_w
from src.protocol.wmap import read_sequence
from src.storage import snapshot_export


def _search(vetter, server, keyword):
    token = vetter.issue_search(keyword)
    if token is None:
        return set(), None
    outcome = server.search(token)
    return vetter.decrypt_results(keyword, outcome.rset), outcome


class TestExampleScenario:
    def test_add_builds_expected_state(self, system):
        trustee, vetter, server = system
        batch, w_delta = trustee.add_batch(EXAMPLE_RECORDS)
        assert batch.pair_count == 6
        assert len(batch.rows) == 3
        assert all(len(row.deltas) == 2 for row in batch.rows)
        counters = {entry.keyword: entry.counter for entry in w_delta.entries}
        assert counters == {"w1": 3, "w2": 1, "w3": 2}
        assert [entry.keyword for entry in w_delta.entries] == ["w1", "w2", "w3"]

        server.apply_add(batch)
        vetter.sync(w_delta)
        assert server.index_size() == 6
        assert server.row_count() == 3

    def test_searches(self, example_db):
        _, vetter, server = example_db
        assert vetter.issue_search("w1").c == 3
        assert _search(vetter, server, "w1")[0] == {b"ID1", b"ID2", b"ID3"}
        assert _search(vetter, server, "w2")[0] == {b"ID1"}
        assert _search(vetter, server, "w3")[0] == {b"ID2", b"ID3"}

    def test_revoke_then_search(self, example_db):
        trustee, vetter, server = example_db
        report = server.apply_delete(trustee.issue_delete(b"ID2"))
        assert report.removed_count == 2
        assert report.row_removed
        assert server.index_size() == 4
        assert server.row_count() == 2

        identifiers, outcome = _search(vetter, server, "w1")
        assert identifiers == {b"ID1", b"ID3"}
        assert outcome.iterations == 3
        assert outcome.hits == 2
        assert outcome.skipped == 1
        assert _search(vetter, server, "w3")[0] == {b"ID3"}

    def test_w_maps_agree(self, example_db):
        trustee, vetter, server = example_db
        modulus = server.public.modulus
        assert snapshot_w(trustee.store, modulus) == snapshot_w(vetter.store, modulus)

    def test_egdb_invariant(self, example_db):
        trustee, _, server = example_db
        harness = KeyHoldingHarness(trustee.keys, server)
        ids = [identifier for identifier, _ in EXAMPLE_RECORDS]
        assert harness.check_invariants(ids) == []
        server.apply_delete(trustee.issue_delete(b"ID1"))
        assert harness.check_invariants([b"ID2", b"ID3"]) == []
        assert harness.row_deltas(b"ID1") == []


class TestTrustee:
    def test_empty_batch(self, system):
        trustee, vetter, _ = system
        batch, w_delta = trustee.add_batch([])
        assert batch.is_empty
        assert w_delta.entries == []
        assert read_sequence(trustee.store) == 0
        vetter.sync(w_delta)

    def test_record_without_keywords_rejected(self, system):
        trustee, _, _ = system
        with pytest.raises(ProtocolError):
            trustee.add_batch([(b"ID1", [])])

    def test_duplicate_keywords_in_record_collapse(self, system):
        trustee, _, _ = system
        batch, w_delta = trustee.add_batch([(b"ID1", ["w1", "w1", "w2"])])
        assert batch.pair_count == 2

    def test_counters_continue_across_batches(self, example_db):
        trustee, vetter, server = example_db
        batch, w_delta = trustee.add_batch([(b"ID4", ["w1"])])
        entry = w_delta.entries[0]
        assert (entry.previous_counter, entry.counter) == (3, 4)
        assert w_delta.sequence == 2
        server.apply_add(batch)
        vetter.sync(w_delta)
        assert _search(vetter, server, "w1")[0] == {b"ID1", b"ID2", b"ID3", b"ID4"}

    def test_delete_token_is_deterministic(self, example_db):
        trustee, _, _ = example_db
        assert trustee.issue_delete(b"ID1") == trustee.issue_delete(b"ID1")
        assert trustee.issue_delete(b"ID1") != trustee.issue_delete(b"ID2")

    def test_chain_consistency(self, perm_keys):
        recorder = ChainRecorder()
        trustee, _, server = setup(rng=SeededRandomSource(21), perm_keys=perm_keys,
                                   on_chain_origin=recorder)
        trustee.add_batch(EXAMPLE_RECORDS)
        trustee.add_batch([(b"ID4", ["w1", "w4"])])
        harness = KeyHoldingHarness(trustee.keys, server)
        assert set(recorder.origins) == {"w1", "w2", "w3", "w4"}
        for keyword, origin in recorder.origins.items():
            assert harness.check_chain(keyword, origin, trustee.store)

    def test_zero_residue_aborts_batch(self, perm_keys):
        # order-11 subgroup: a chain value hits 0 mod 11 long before 300 keywords
        trustee, _, _ = setup(rng=SeededRandomSource(5), perm_keys=perm_keys, group="modp-23")
        with pytest.raises(ZeroResidueFault):
            trustee.add_batch([(b"ID1", [f"k{i}" for i in range(300)])])
        assert trustee.store.count("wmap") == 0
        assert read_sequence(trustee.store) == 0


class TestPreparedBatches:
    def test_prepare_leaves_w_untouched(self, example_db):
        trustee, _, _ = example_db
        before = snapshot_export(trustee.store)
        prepared = trustee.prepare_batch([(b"ID4", ["w1", "w4"])])
        assert prepared.batch.pair_count == 2
        assert prepared.w_delta.sequence == 2
        assert snapshot_export(trustee.store) == before

    def test_commit_of_stale_preparation_refused(self, system):
        trustee, _, _ = system
        first = trustee.prepare_batch(EXAMPLE_RECORDS)
        second = trustee.prepare_batch([(b"ID4", ["w1"])])
        trustee.commit(first)
        after_first = snapshot_export(trustee.store)
        with pytest.raises(StalenessError):
            trustee.commit(second)
        assert snapshot_export(trustee.store) == after_first

    def test_dry_runs_change_nothing(self, system):
        trustee, vetter, server = system
        batch, w_delta = trustee.add_batch(EXAMPLE_RECORDS)
        server.check_add(batch)
        vetter.check_sync(w_delta)
        assert server.index_size() == 0
        assert read_sequence(vetter.store) == 0
        server.apply_add(batch)
        vetter.sync(w_delta)
        with pytest.raises(DuplicateLabelFault):
            server.check_add(batch)
        with pytest.raises(StalenessError):
            vetter.check_sync(w_delta)
        vetter.check_sync(WDelta(sequence=9, entries=[]))

    def test_lost_server_write_only_skips_its_slots(self, example_db):
        trustee, vetter, server = example_db
        lost = trustee.prepare_batch([(b"ID4", ["w1"])])
        trustee.commit(lost)
        vetter.sync(lost.w_delta)
        batch, w_delta = trustee.add_batch([(b"ID5", ["w1"])])
        server.apply_add(batch)
        vetter.sync(w_delta)
        identifiers, outcome = _search(vetter, server, "w1")
        assert identifiers == {b"ID1", b"ID2", b"ID3", b"ID5"}
        assert outcome.skipped == 1
        modulus = trustee.keys.public.modulus
        assert snapshot_w(trustee.store, modulus) == snapshot_w(vetter.store, modulus)


class TestDataServer:
    def test_replayed_batch_rejected_atomically(self, system):
        trustee, _, server = system
        batch, _ = trustee.add_batch(EXAMPLE_RECORDS)
        server.apply_add(batch)
        before = snapshot_export(server.store)
        with pytest.raises(DuplicateLabelFault):
            server.apply_add(batch)
        assert snapshot_export(server.store) == before

    def test_delete_unknown_identifier(self, example_db):
        trustee, _, server = example_db
        report = server.apply_delete(trustee.issue_delete(b"never-added"))
        assert report.removed_count == 0
        assert not report.row_removed
        assert server.index_size() == 6

    def test_delete_row_returns_add_time_labels(self, system):
        trustee, _, server = system
        batch, _ = trustee.add_batch(EXAMPLE_RECORDS)
        server.apply_add(batch)
        # entries follow record order: ID2 owns the third and fourth
        report, labels = server.delete_row(trustee.issue_delete(b"ID2"))
        assert report.removed_count == 2
        assert sorted(labels) == sorted(entry.label for entry in batch.entries[2:4])
        assert all(server.store.get("iset", label) is None for label in labels)

    def test_delete_row_of_unknown_identifier(self, example_db):
        trustee, _, server = example_db
        report, labels = server.delete_row(trustee.issue_delete(b"never-added"))
        assert not report.row_removed
        assert labels == []

    def test_delete_twice_is_idempotent(self, example_db):
        trustee, _, server = example_db
        token = trustee.issue_delete(b"ID3")
        assert server.apply_delete(token).removed_count == 2
        assert server.apply_delete(token).removed_count == 0

    def test_malformed_search_token(self, example_db):
        _, _, server = example_db
        bad = SearchToken(tk=b"\xff" * 31 + b"\x7f", st=5, c=1)
        with pytest.raises(MalformedTokenError):
            server.search(bad)
        too_big = SearchToken(tk=server.public.generator.encode(), st=server.public.modulus, c=1)
        with pytest.raises(MalformedTokenError):
            server.search(too_big)

    def test_malformed_delete_token(self, example_db):
        _, _, server = example_db
        token = DeleteToken(tag_id=server.group.order, r_id=b"\x00" * 16)
        with pytest.raises(MalformedTokenError):
            server.apply_delete(token)

    def test_search_after_revoking_everything(self, example_db):
        trustee, vetter, server = example_db
        for identifier, _ in EXAMPLE_RECORDS:
            server.apply_delete(trustee.issue_delete(identifier))
        assert server.index_size() == 0
        identifiers, outcome = _search(vetter, server, "w1")
        assert identifiers == set()
        assert outcome.skipped == outcome.iterations == 3


class TestVetter:
    def test_unknown_keyword_needs_no_server_round(self, example_db):
        _, vetter, _ = example_db
        assert vetter.issue_search("w9") is None

    def test_empty_result(self, example_db):
        _, vetter, _ = example_db
        assert vetter.decrypt_results("w1", []) == set()

    def test_cross_key_result_rejected(self, example_db):
        _, vetter, server = example_db
        foreign = server.search(vetter.issue_search("w2")).rset
        with pytest.raises(ResultIntegrityError) as info:
            vetter.decrypt_results("w1", foreign)
        assert info.value.index == 0

    def test_policy_denial(self, perm_keys):
        _, vetter, _ = setup(rng=SeededRandomSource(8), perm_keys=perm_keys,
                             policy=lambda keyword: not keyword.startswith("restricted"))
        with pytest.raises(AuthorizationError):
            vetter.issue_search("restricted:trait")

    def test_replayed_delta_is_stale(self, system):
        trustee, vetter, _ = system
        _, w_delta = trustee.add_batch(EXAMPLE_RECORDS)
        vetter.sync(w_delta)
        with pytest.raises(StalenessError):
            vetter.sync(w_delta)

    def test_skipped_delta_is_stale(self, system):
        trustee, vetter, _ = system
        trustee.add_batch(EXAMPLE_RECORDS)
        _, second = trustee.add_batch([(b"ID4", ["w1"])])
        with pytest.raises(StalenessError):
            vetter.sync(second)

    def test_fresh_vetter_sync(self, system):
        trustee, vetter, _ = system
        _, w_delta = trustee.add_batch(EXAMPLE_RECORDS)
        vetter.sync(w_delta)
        assert vetter.issue_search("w1").c == 3
        vetter.sync(WDelta(sequence=7, entries=[]))


class TestRoleIsolation:
    def test_vetter_keys_hold_no_trustee_secrets(self, system):
        _, vetter, _ = system
        for name in ("index_key", "id_tag_key", "perm_keys"):
            assert not hasattr(vetter.keys, name)

    def test_stores_hold_only_their_keys(self, system):
        trustee, vetter, server = system
        trustee_keys = {key for key, _ in trustee.store.items("keys")}
        vetter_keys = {key for key, _ in vetter.store.items("keys")}
        server_keys = {key for key, _ in server.store.items("keys")}
        assert {b"K_1", b"K_2", b"perm_p", b"perm_q"} <= trustee_keys
        assert vetter_keys == {b"group", b"perm_n", b"perm_e", b"k_h", b"K_S", b"K_T"}
        assert server_keys == {b"group", b"perm_n", b"perm_e", b"k_h"}

    def test_roles_reopen_from_stores(self, example_db):
        from src.protocol import DataServer, Trustee, Vetter

        trustee, vetter, server = example_db
        reopened_trustee = Trustee.open(trustee.store)
        reopened_vetter = Vetter.open(vetter.store)
        reopened_server = DataServer.open(server.store)
        assert reopened_trustee.issue_delete(b"ID1") == trustee.issue_delete(b"ID1")
        assert _search(reopened_vetter, reopened_server, "w3")[0] == {b"ID2", b"ID3"}


class TestOperationCounts:
    def test_search_work_matches_counter(self, example_db):
        _, vetter, server = example_db
        token = vetter.issue_search("w1")
        with count_operations() as counts:
            outcome = server.search(token)
        assert outcome.iterations == token.c == 3
        assert counts.perm_forwards == counts.group_exps == counts.hashes == 3

    @pytest.mark.parametrize("x", [1, 10, 100])
    def test_delete_token_size_is_constant(self, perm_keys, x):
        from src.wire import codec

        trustee, _, server = setup(rng=SeededRandomSource(x), perm_keys=perm_keys)
        batch, _ = trustee.add_batch([(b"ID-x", [f"kw:{i}" for i in range(x)])])
        server.apply_add(batch)
        token = trustee.issue_delete(b"ID-x")
        assert len(codec.encode_delete_token(token)) == 4 + 1 + 4 + 48 + 32
        assert server.apply_delete(token).removed_count == x
