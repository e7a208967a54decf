"""Accumulative dicing benchmark: DFG time against the number of events in the window."""

from __future__ import annotations

import csv
import gc
import statistics
import time
from dataclasses import dataclass, field

from .dfg.matrix import DfgFilter
from .dfg.scan import ScanReport, dfg_scan
from .errors import StoreError
from .storage.store import GraphStore
from .timeutil import TimeWindow, format_instant

CSV_HEADER = ["window_end", "events", "dfg_ms", "peak_mem_bytes"]


@dataclass
class BenchRow:
    window_end: int
    events: int
    dfg_ms: float
    peak_mem_bytes: int
    edges: int  # total DFG count in this window; not part of the CSV


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)

    def to_csv(self, stream):
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([format_instant(r.window_end), r.events, f"{r.dfg_ms:.3f}", r.peak_mem_bytes])


def accumulative_windows(start: int, stop: int, step_ms: int) -> list[TimeWindow]:
    """Windows [start, start + k*step] for k = 1, 2, ... until one reaches ``stop``."""
    if step_ms <= 0:
        raise ValueError("window step must be positive")
    out = []
    k = 1
    while True:
        end = start + k * step_ms
        out.append(TimeWindow(start, end))
        if end >= stop:
            return out
        k += 1


def run_bench(store: GraphStore, step_ms: int, repeat: int = 3, *, threads: int = 1,
              max_windows: int | None = None) -> BenchReport:
    """Time one DFG scan per accumulative window; each row is the median of ``repeat`` runs
    after one discarded warm-up run."""
    if repeat < 1:
        raise ValueError("repeat must be at least 1")
    bounds = store.time_bounds()
    if bounds is None:
        raise StoreError("store holds no events")
    windows = accumulative_windows(bounds[0], bounds[1], step_ms)
    if max_windows is not None:
        windows = windows[:max_windows]
    report = BenchReport()
    for w in windows:
        filt = DfgFilter(w)
        m = dfg_scan(store, filt, threads=threads)
        times, peak = [], 0
        for _ in range(repeat):
            rep = ScanReport()
            # same as timeit: keep collector pauses out of the measurement
            gc_was_on = gc.isenabled()
            gc.disable()
            try:
                t0 = time.perf_counter()
                m = dfg_scan(store, filt, threads=threads, report=rep)
                times.append((time.perf_counter() - t0) * 1000.0)
            finally:
                if gc_was_on:
                    gc.enable()
            peak = max(peak, rep.peak_bytes)
        report.rows.append(BenchRow(w.end, store.count_events(w), statistics.median(times), peak, m.total))
    return report
