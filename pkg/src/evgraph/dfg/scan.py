"""Budgeted single-pass DFG over a store's Event->Event edge file.

Every edge record already carries both activity ids, so counting is a
group-by on (src activity, dst activity). Small alphabets use a dense
|A| x |A| counter. Otherwise partial counts live in a sorted key/count
table; when the table would outgrow its share of the budget it is
written out as a sorted run and the runs are k-way merged at the end.
"""

from __future__ import annotations

import heapq
import logging
import os
import shutil
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..storage.budget import MemoryBudget
from ..storage.store import MAX_CHUNK_EDGES, SCAN_BYTES_PER_EDGE, GraphStore
from .matrix import DfgFilter, DfgMatrix

log = logging.getLogger(__name__)

# per scanned edge: activity-id copies after the allowlist, packed keys, sort/unique temporaries
AGG_BYTES_PER_EDGE = 64
TABLE_ENTRY_BYTES = 16
# concat + argsort + gathered copies + boundary flags while folding a batch into the table
FOLD_BYTES_PER_ENTRY = 72
# one (key, count) pair materialized as Python objects inside the merge heap
MERGE_BYTES_PER_ENTRY = 160
RUN_DTYPE = np.dtype([("key", "<u8"), ("count", "<u8")])


@dataclass
class ScanReport:
    edges_scanned: int = 0
    edges_counted: int = 0
    runs_spilled: int = 0
    merge_passes: int = 0
    dense: bool = False
    peak_bytes: int = 0


def dfg_scan(store: GraphStore, filt: DfgFilter | None = None, *, threads: int = 1,
             budget: MemoryBudget | None = None, report: ScanReport | None = None) -> DfgMatrix:
    """DFG of the edges whose endpoints both pass ``filt``."""
    filt = filt or DfgFilter()
    budget = budget or store.budget
    report = report if report is not None else ScanReport()
    names = store.activities
    if filt.activities:
        keep = [i for i, n in enumerate(names) if n in filt.activities]
    else:
        keep = list(range(len(names)))
    if not keep:
        return DfgMatrix(())
    allowed = None
    if len(keep) < len(names):
        allowed = np.zeros(len(names), dtype=bool)
        allowed[keep] = True

    start_peak = budget.peak
    budget.reset_peak()
    ranges = store.edge_ranges(filt.window)
    parts = _partition(ranges, max(1, threads))
    share = budget.available() // max(1, len(parts))
    n_act = len(names)
    dense = 2 * n_act * n_act * 8 <= share // 4
    report.dense = dense
    workers = [_Worker(store, budget, share, filt.window, allowed, n_act, dense) for _ in parts]
    if len(parts) <= 1:
        results = [w.run(p) for w, p in zip(workers, parts)]
    else:
        with ThreadPoolExecutor(max_workers=len(parts)) as pool:
            results = list(pool.map(lambda wp: wp[0].run(wp[1]), zip(workers, parts)))
    keys, counts = _combine(results)
    for w in workers:
        report.edges_scanned += w.report.edges_scanned
        report.edges_counted += w.report.edges_counted
        report.runs_spilled += w.report.runs_spilled
        report.merge_passes += w.report.merge_passes
    report.peak_bytes = budget.peak
    budget.peak = max(budget.peak, start_peak)

    out = {}
    for key, c in zip(keys.tolist(), counts.tolist()):
        out[(names[key >> 32], names[key & 0xFFFFFFFF])] = c
    return DfgMatrix(tuple(names[i] for i in keep), out)


def _partition(ranges, parts):
    total = sum(b - a for a, b in ranges)
    if total == 0:
        return []
    target = -(-total // parts)
    out, cur, room = [], [], target
    for a, b in ranges:
        while a < b:
            take = min(b - a, room)
            cur.append((a, a + take))
            a += take
            room -= take
            if room == 0:
                out.append(cur)
                cur, room = [], target
    if cur:
        out.append(cur)
    return out


def _combine(results):
    results = [r for r in results if len(r[0])]
    if not results:
        return np.empty(0, np.uint64), np.empty(0, np.uint64)
    if len(results) == 1:
        return results[0]
    # result assembly scales with distinct pairs, i.e. with the output, and is not leased
    return _fold(np.concatenate([k for k, _ in results]), np.concatenate([c for _, c in results]))


def _fold(keys, counts):
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    counts = counts[order]
    del order
    if len(keys) == 0:
        return keys, counts
    starts = np.flatnonzero(np.concatenate(([True], keys[1:] != keys[:-1])))
    return keys[starts], np.add.reduceat(counts, starts)


class _Worker:
    def __init__(self, store, budget, share, window, allowed, n_act, dense):
        self.store = store
        self.budget = budget
        self.window = window
        self.allowed = allowed
        self.n_act = n_act
        self.dense = dense
        self.report = ScanReport(dense=dense)
        self.table_share = share // 4
        self.merge_share = share // 4
        # bigger reads than this buy nothing and push temporaries out of cache
        self.chunk_edges = max(1, min(MAX_CHUNK_EDGES, (share // 2) // (SCAN_BYTES_PER_EDGE + AGG_BYTES_PER_EDGE)))
        self.runs: list[str] = []
        self.spill_dir = None

    def run(self, ranges):
        self.chunk_edges = max(1, min(self.chunk_edges, sum(b - a for a, b in ranges)))
        try:
            if self.dense:
                return self._run_dense(ranges)
            return self._run_sparse(ranges)
        finally:
            if self.spill_dir:
                shutil.rmtree(self.spill_dir, ignore_errors=True)

    def _batches(self, ranges):
        for src, dst in self.store.scan_edge_activities(self.window, ranges=ranges,
                                                        chunk_edges=self.chunk_edges, budget=self.budget):
            self.report.edges_scanned += len(src)
            if self.allowed is not None:
                m = self.allowed[src] & self.allowed[dst]
                src, dst = src[m], dst[m]
                del m
            self.report.edges_counted += len(src)
            if len(src):
                yield src, dst

    def _run_dense(self, ranges):
        cells = self.n_act * self.n_act
        with self.budget.reserve(2 * cells * 8, "dense dfg table"), \
                self.budget.reserve(self.chunk_edges * AGG_BYTES_PER_EDGE, "aggregation temporaries"):
            table = np.zeros(cells, dtype=np.int64)
            for src, dst in self._batches(ranges):
                idx = src.astype(np.int64) * self.n_act + dst
                table += np.bincount(idx, minlength=cells)
                del idx
            nz = np.flatnonzero(table)
            keys = ((nz // self.n_act).astype(np.uint64) << np.uint64(32)) | (nz % self.n_act).astype(np.uint64)
            return keys, table[nz].astype(np.uint64)

    def _run_sparse(self, ranges):
        tkeys = np.empty(0, np.uint64)
        tcounts = np.empty(0, np.uint64)
        with self.budget.reserve(0, "dfg table") as table_lease, \
                self.budget.reserve(self.chunk_edges * AGG_BYTES_PER_EDGE, "aggregation temporaries"):
            for src, dst in self._batches(ranges):
                keys = (src.astype(np.uint64) << np.uint64(32)) | dst.astype(np.uint64)
                ukeys, ucounts = np.unique(keys, return_counts=True)
                del keys
                ucounts = ucounts.astype(np.uint64)
                if (len(tkeys) + len(ukeys)) * FOLD_BYTES_PER_ENTRY > self.table_share:
                    if len(tkeys):
                        self._spill(tkeys, tcounts)
                        tkeys = tcounts = np.empty(0, np.uint64)
                        table_lease.resize(0)
                    if len(ukeys) * FOLD_BYTES_PER_ENTRY > self.table_share:
                        self._spill(ukeys, ucounts)
                        continue
                    tkeys, tcounts = ukeys, ucounts
                else:
                    with self.budget.reserve((len(tkeys) + len(ukeys)) * FOLD_BYTES_PER_ENTRY, "table fold"):
                        tkeys, tcounts = _fold(np.concatenate((tkeys, ukeys)), np.concatenate((tcounts, ucounts)))
                del ukeys, ucounts
                table_lease.resize(len(tkeys) * TABLE_ENTRY_BYTES)
            if not self.runs:
                return tkeys, tcounts
            if len(tkeys):
                self._spill(tkeys, tcounts)
            del tkeys, tcounts
            table_lease.resize(0)
        return self._merge_all()

    def _spill(self, keys, counts):
        if self.spill_dir is None:
            self.spill_dir = tempfile.mkdtemp(prefix="dfg-spill-", dir=self.store.path)
        path = os.path.join(self.spill_dir, f"run{len(self.runs):05d}.bin")
        step = max(1, self.merge_share // (2 * RUN_DTYPE.itemsize))
        with self.budget.reserve(min(step, len(keys)) * RUN_DTYPE.itemsize, "spill buffer"), open(path, "wb") as f:
            for i in range(0, len(keys), step):
                rec = np.empty(min(step, len(keys) - i), dtype=RUN_DTYPE)
                rec["key"] = keys[i:i + step]
                rec["count"] = counts[i:i + step]
                f.write(rec.tobytes())
                del rec
        self.runs.append(path)
        self.report.runs_spilled += 1
        log.debug("spilled run %s with %d pairs", path, len(keys))

    def _merge_all(self):
        block = max(16, min(4096, self.merge_share // MERGE_BYTES_PER_ENTRY // 8))
        fan_in = max(2, self.merge_share // (block * MERGE_BYTES_PER_ENTRY) - 1)
        runs = self.runs
        while len(runs) > fan_in:
            merged = []
            for i in range(0, len(runs), fan_in):
                group = runs[i:i + fan_in]
                if len(group) == 1:
                    merged.append(group[0])
                    continue
                out = os.path.join(self.spill_dir, f"merge{self.report.merge_passes:03d}-{i:05d}.bin")
                self._merge(group, block, out)
                merged.append(out)
            self.report.merge_passes += 1
            runs = merged
        self.report.merge_passes += 1
        return self._merge(runs, block, None)

    def _merge(self, paths, block, out_path):
        """Merge sorted runs, summing equal keys, into ``out_path`` or into memory."""
        with self.budget.reserve(len(paths) * block * MERGE_BYTES_PER_ENTRY, "merge read blocks"), \
                self.budget.reserve(block * MERGE_BYTES_PER_ENTRY, "merge output block"):
            files = [open(p, "rb") for p in paths]
            try:
                merged = heapq.merge(*(_read_run(f, block) for f in files))
                pending: list[tuple[int, int]] = []
                out_f = open(out_path, "wb") if out_path else None
                result_keys, result_counts = [], []
                cur_key, cur_count = None, 0

                def flush():
                    if not pending:
                        return
                    rec = np.array(pending, dtype=RUN_DTYPE)
                    pending.clear()
                    if out_f:
                        out_f.write(rec.tobytes())
                    else:
                        # the final pass materializes the caller's result, which is not leased
                        result_keys.append(rec["key"].copy())
                        result_counts.append(rec["count"].copy())

                for key, count in merged:
                    if key == cur_key:
                        cur_count += count
                        continue
                    if cur_key is not None:
                        pending.append((cur_key, cur_count))
                        if len(pending) >= block:
                            flush()
                    cur_key, cur_count = key, count
                if cur_key is not None:
                    pending.append((cur_key, cur_count))
                flush()
                if out_f:
                    out_f.close()
                    return None
                if not result_keys:
                    return np.empty(0, np.uint64), np.empty(0, np.uint64)
                return np.concatenate(result_keys), np.concatenate(result_counts)
            finally:
                for f in files:
                    f.close()


def _read_run(f, block):
    while True:
        rec = np.fromfile(f, dtype=RUN_DTYPE, count=block)
        if len(rec) == 0:
            return
        yield from rec.tolist()

