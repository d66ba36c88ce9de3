"""
Verification lab: plaintext oracle, workloads, cost model, benchmarks, the decisional
instance generator and server-view transcript audits.
"""

from src.crypto_suite.instrumentation import OpCounters, count_operations

from .bench import BenchGrid, BenchRow, BenchRunner, linear_trend, plot_bench, write_bench_csv
from .cost_model import count_operation, expected_add, expected_delete, expected_search
from .dace import DAceInstance, dace_generate, dace_verify_real
from .harness import ChainRecorder, KeyHoldingHarness, scan_for_leaks
from .oracle import PlainDatabase, oracle_apply, oracle_search
from .transcript import (
    AuditReport, RecordingServer, TranscriptEvent, audit_transcript, read_transcript,
    write_transcript,
)
from .workload import EquivalenceReport, WorkloadSpec, run_workload
