"""Accumulative time dicing: one DFG scan per growing window."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..errors import InvalidDicing
from ..storage.store import GraphStore
from ..timeutil import TimeWindow
from .matrix import DfgFilter, DfgMatrix
from .scan import ScanReport, dfg_scan


@dataclass
class DiceResult:
    window: TimeWindow
    matrix: DfgMatrix
    elapsed: float  # seconds
    report: ScanReport


def check_accumulative(windows: Sequence[TimeWindow]):
    if not windows:
        return
    start = windows[0].start
    prev_end = windows[0].end
    for i, w in enumerate(windows):
        if w.start != start:
            raise InvalidDicing(f"window {i} starts at a different instant than window 0")
        if i and prev_end is None and w.end is not None:
            raise InvalidDicing(f"window {i} ends before the unbounded window {i - 1}")
        if i and prev_end is not None and w.end is not None and w.end < prev_end:
            raise InvalidDicing(f"window {i} ends before window {i - 1}")
        prev_end = w.end


def dice(store: GraphStore, windows: Iterable[TimeWindow], *, activities=None, threads: int = 1,
         policy=None, role: str | None = None) -> list[DiceResult]:
    """Run one scan per window and time it.

    ``policy``/``role`` route every scan through the access gateway.
    """
    windows = list(windows)
    check_accumulative(windows)
    if role is not None:
        from ..access import dfg_scan_as
    out = []
    for w in windows:
        filt = DfgFilter(w, frozenset(activities) if activities else None)
        report = ScanReport()
        t0 = time.perf_counter()
        if role is not None:
            m = dfg_scan_as(store, filt, policy, role, threads=threads, report=report)
        else:
            m = dfg_scan(store, filt, threads=threads, report=report)
        out.append(DiceResult(w, m, time.perf_counter() - t0, report))
    return out
