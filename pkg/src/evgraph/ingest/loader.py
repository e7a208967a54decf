from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from ..errors import DuplicateCase, DuplicateLog, NonemptyRequired
from ..graph import EventRepository
from ..storage.store import GraphStore
from .csvlog import ColumnMapping, parse_csv, write_csv
from .records import TraceRecord
from .xes import parse_xes

log = logging.getLogger(__name__)

CHUNK_EVENTS = 50_000


@dataclass
class IngestStats:
    traces: int = 0
    events: int = 0
    activities: int = 0
    reordered: int = 0

    def as_lines(self) -> list[str]:
        return [f"traces={self.traces}", f"events={self.events}",
                f"activities={self.activities}", f"reordered={self.reordered}"]


def ingest(records: Iterable[TraceRecord], store: GraphStore, log_name: str,
           chunk_events: int = CHUNK_EVENTS) -> IngestStats:
    """Load trace records as one new log.

    Records are built into small repositories through the graph-core API
    and persisted chunk by chunk, so memory stays bounded by
    ``chunk_events``. On any error the store is rolled back to its state
    before the call.
    """
    if not log_name:
        raise NonemptyRequired("log name must be nonempty")
    stats = IngestStats()
    with store.writing():
        if store.log_id(log_name) is not None:
            raise DuplicateLog(f"log {log_name!r} already exists in store")
        seen: set[str] = set()
        first = True
        repo, log_node, pending = EventRepository(), None, 0

        def flush():
            nonlocal first, repo, log_node, pending
            written = store.persist(repo, into_log=None if first else log_name)
            stats.activities += written.activities
            first = False
            repo, log_node, pending = EventRepository(), None, 0

        for rec in records:
            if rec.case_name in seen:
                raise DuplicateCase(f"case {rec.case_name!r} appears twice in log {log_name!r}")
            seen.add(rec.case_name)
            rec = rec.normalized()
            if log_node is None:
                log_node = repo.add_log(log_name)
            trace = repo.add_trace(log_node, rec.case_name)
            for activity, ts in rec.events:
                repo.append_event(trace, activity, ts)
            stats.traces += 1
            stats.events += len(rec.events)
            stats.reordered += rec.reordered
            pending += len(rec.events)
            if pending >= chunk_events:
                flush()
        if first:
            if log_node is None:
                repo.add_log(log_name)
            flush()
        elif log_node is not None:
            flush()
    if stats.reordered:
        log.warning("%d traces had out-of-order timestamps and were stably re-sorted", stats.reordered)
    return stats


def read_log(path, format: str, mapping: ColumnMapping | None = None) -> Iterable[TraceRecord]:
    """Open ``path`` and stream its records; ``format`` is ``xes`` or ``csv``."""
    fh = open(path, "rb")
    try:
        if format == "xes":
            yield from parse_xes(fh)
        elif format == "csv":
            yield from parse_csv(fh, mapping or ColumnMapping())
        else:
            raise ValueError(f"unknown log format {format!r}")
    finally:
        fh.close()


def store_records(store: GraphStore, log_name: str | None = None) -> Iterable[TraceRecord]:
    for lname, case, events in store.iter_traces():
        if log_name is None or lname == log_name:
            yield TraceRecord(case, events)


def export_csv(store: GraphStore, stream: TextIO, log_name: str | None = None,
               mapping: ColumnMapping = ColumnMapping()):
    """Write the stored events (optionally of one log) back out as CSV."""
    write_csv(store_records(store, log_name), stream, mapping)


def default_log_name(path) -> str:
    return Path(path).stem
