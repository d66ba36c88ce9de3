"""
Benchmark scenarios: addition, deletion, search, parallel search and storage size.
Each scenario yields BenchRow values (scenario, param, repetitions, mean_ns, p95_ns, bytes)
written as CSV; timings are wall-clock nanoseconds of the measured step.
"""

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import psutil
from pydantic import BaseModel

from src.crypto_suite import PermKeyPair, SeededRandomSource, perm_keygen
from src.protocol import setup
from src.storage import storage_metrics
from src.wire import PLANTED_KEYWORD, codec, generate_dataset, write_dataset_csv

from .cost_model import pairwise_delete_token_bytes

logger = logging.getLogger(__name__)

BENCH_COLUMNS = ["scenario", "param", "repetitions", "mean_ns", "p95_ns", "bytes"]
SCENARIOS = ("add", "delete", "search", "search_parallel", "storage")


class BenchRow(BaseModel):
    scenario: str
    param: int
    repetitions: int
    mean_ns: float
    p95_ns: float
    bytes: int


class BenchGrid(BaseModel):
    add_keywords: List[int] = [100, 200, 300, 400, 500, 600, 700, 800, 900, 1000]
    delete_keywords: List[int] = [1, 10, 100, 1000]
    search_matches: List[int] = [10, 100, 500, 1000, 2000]
    storage_records: int = 1000
    storage_keywords: List[int] = [500, 1000]
    repetitions: int = 3
    threads: int = 4

    @classmethod
    def quick(cls) -> "BenchGrid":
        return cls(add_keywords=[10, 20, 40], delete_keywords=[1, 10, 100], search_matches=[10, 20, 40],
                   storage_records=20, storage_keywords=[10, 20], repetitions=2, threads=2)


def _summarize(scenario: str, param: int, samples: Sequence[int], size: int) -> BenchRow:
    values = np.asarray(samples, dtype=np.float64)
    return BenchRow(scenario=scenario, param=param, repetitions=len(samples),
                    mean_ns=float(values.mean()) if len(values) else 0.0,
                    p95_ns=float(np.percentile(values, 95)) if len(values) else 0.0,
                    bytes=size)


def _timed(fn: Callable):
    start = time.perf_counter_ns()
    result = fn()
    return time.perf_counter_ns() - start, result


class BenchRunner:
    def __init__(self, seed: int = 0, grid: Optional[BenchGrid] = None,
                 perm_keys: Optional[PermKeyPair] = None, group: str = "ed25519",
                 workdir: Optional[Path] = None):
        self.seed = seed
        self.grid = grid or BenchGrid()
        self.group = group
        self.workdir = Path(workdir) if workdir else None
        self.perm_keys = perm_keys or perm_keygen(rng=SeededRandomSource(seed, label=b"ace/bench-perm"))
        self._process = psutil.Process()

    def _system(self, offset: int = 0):
        return setup(rng=SeededRandomSource(self.seed + offset), perm_keys=self.perm_keys, group=self.group)

    def _log_memory(self, scenario: str) -> None:
        rss = self._process.memory_info().rss / (1024 * 1024)
        logger.info(f"Scenario {scenario} done, RSS {rss:.1f} MiB")

    def run_add(self) -> List[BenchRow]:
        rows = []
        for x in self.grid.add_keywords:
            samples, size = [], 0
            for rep in range(self.grid.repetitions):
                trustee, _, server = self._system(rep)
                ctx = codec.WireContext.from_public(server.public)
                records = [r.as_pair() for r in generate_dataset(2, x, seed=self.seed + rep)]
                elapsed, (batch, _) = _timed(lambda: trustee.add_batch(records))
                message = codec.encode_add_batch(batch, ctx)
                applied, _ = _timed(lambda: server.apply_add(codec.decode_add_batch(message, ctx)))
                samples.append(elapsed + applied)
                size = len(message)
            rows.append(_summarize("add", x, samples, size))
        self._log_memory("add")
        return rows

    def run_delete(self) -> List[BenchRow]:
        rows = []
        for x in self.grid.delete_keywords:
            trustee_samples, server_samples, size = [], [], 0
            for rep in range(self.grid.repetitions):
                trustee, _, server = self._system(rep)
                ctx = codec.WireContext.from_public(server.public)
                record = generate_dataset(1, x, seed=self.seed + rep)[0]
                batch, _ = trustee.add_batch([record.as_pair()])
                server.apply_add(batch)
                elapsed, token = _timed(lambda: trustee.issue_delete(record.id_bytes))
                message = codec.encode_delete_token(token, ctx)
                applied, _ = _timed(lambda: server.apply_delete(codec.decode_delete_token(message, ctx)))
                trustee_samples.append(elapsed)
                server_samples.append(applied)
                size = len(message)
            rows.append(_summarize("delete_trustee", x, trustee_samples, size))
            rows.append(_summarize("delete_server", x, server_samples, size))
            rows.append(_summarize("delete_pairwise_token", x, [], pairwise_delete_token_bytes(x, len(b"P000000"))))
        self._log_memory("delete")
        return rows

    def _search_system(self, alpha: int, rep: int):
        trustee, vetter, server = self._system(rep)
        records = [(f"P{i:06d}".encode(), [PLANTED_KEYWORD]) for i in range(alpha)]
        batch, w_delta = trustee.add_batch(records)
        server.apply_add(batch)
        vetter.sync(w_delta)
        return vetter, server, codec.WireContext.from_public(server.public)

    def _search_once(self, vetter, server, ctx) -> int:
        token = vetter.issue_search(PLANTED_KEYWORD)
        reply = codec.encode_rset(server.search(codec.decode_search_token(codec.encode_search_token(token, ctx), ctx)).rset, ctx)
        vetter.decrypt_results(PLANTED_KEYWORD, codec.decode_rset(reply, ctx))
        return codec.body_length(codec.encode_search_token(token, ctx))

    def run_search(self) -> List[BenchRow]:
        rows = []
        for alpha in self.grid.search_matches:
            samples, size = [], 0
            for rep in range(self.grid.repetitions):
                vetter, server, ctx = self._search_system(alpha, rep)
                elapsed, size = _timed(lambda: self._search_once(vetter, server, ctx))
                samples.append(elapsed)
            rows.append(_summarize("search", alpha, samples, size))
        self._log_memory("search")
        return rows

    def run_search_parallel(self) -> List[BenchRow]:
        rows = []
        for alpha in self.grid.search_matches:
            vetter, server, ctx = self._search_system(alpha, 0)
            with ThreadPoolExecutor(max_workers=self.grid.threads) as pool:
                futures = [pool.submit(_timed, lambda: self._search_once(vetter, server, ctx))
                           for _ in range(self.grid.threads * self.grid.repetitions)]
                results = [f.result() for f in futures]
            rows.append(_summarize("search_parallel", alpha, [t for t, _ in results], results[0][1]))
        self._log_memory("search_parallel")
        return rows

    def run_storage(self) -> List[BenchRow]:
        rows = []
        r = self.grid.storage_records
        for x in self.grid.storage_keywords:
            trustee, vetter, server = self._system(0)
            dataset = generate_dataset(r, x, seed=self.seed)
            elapsed, (batch, w_delta) = _timed(lambda: trustee.add_batch([rec.as_pair() for rec in dataset]))
            server.apply_add(batch)
            vetter.sync(w_delta)
            server_metrics = storage_metrics(server.store)
            vetter_metrics = storage_metrics(vetter.store)
            if self.workdir is not None:
                self.workdir.mkdir(parents=True, exist_ok=True)
                original = write_dataset_csv(dataset, self.workdir / f"dataset_r{r}_x{x}.csv")
            else:
                original = sum(len(rec.identifier) + 1 + len(";".join(rec.keywords)) + 1 for rec in dataset)
            rows += [
                _summarize("storage_original", x, [], original),
                _summarize("storage_fset", x, [elapsed], server_metrics.fset_bytes),
                _summarize("storage_iset", x, [elapsed], server_metrics.iset_bytes),
                _summarize("storage_w", x, [], vetter_metrics.wmap_bytes),
            ]
        self._log_memory("storage")
        return rows

    def run(self, scenario: str) -> List[BenchRow]:
        runners: Dict[str, Callable[[], List[BenchRow]]] = {
            "add": self.run_add,
            "delete": self.run_delete,
            "search": self.run_search,
            "search_parallel": self.run_search_parallel,
            "storage": self.run_storage,
        }
        if scenario == "all":
            return [row for name in SCENARIOS for row in runners[name]()]
        if scenario not in runners:
            raise ValueError(f"unknown bench scenario {scenario!r}")
        return runners[scenario]()


def write_bench_csv(rows: Sequence[BenchRow], path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.model_dump())


def linear_trend(rows: Sequence[BenchRow], field: str = "mean_ns"):
    """Least-squares (slope, intercept) of field against param."""
    params = np.array([row.param for row in rows], dtype=np.float64)
    values = np.array([getattr(row, field) for row in rows], dtype=np.float64)
    slope, intercept = np.polyfit(params, values, 1)
    return float(slope), float(intercept)


def plot_bench(rows: Sequence[BenchRow], path: Union[str, Path]) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    timed = {}
    for row in rows:
        if row.repetitions:
            timed.setdefault(row.scenario, []).append(row)
    if not timed:
        logger.warning("No timed rows to plot")
        return
    fig, axes = plt.subplots(1, len(timed), figsize=(4 * len(timed), 3.5), squeeze=False)
    for ax, (scenario, group) in zip(axes[0], sorted(timed.items())):
        group = sorted(group, key=lambda r: r.param)
        ax.plot([r.param for r in group], [r.mean_ns / 1e6 for r in group], marker="o")
        ax.set_title(scenario)
        ax.set_xlabel("param")
        ax.set_ylabel("ms")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
