"""Deterministic synthetic event logs for tests and benchmarks."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator
from xml.sax.saxutils import quoteattr

from .ingest.csvlog import write_csv
from .ingest.records import TraceRecord
from .timeutil import format_instant, parse_instant

DAY_MS = 86_400_000


@dataclass(frozen=True)
class SyntheticSpec:
    traces: int = 100
    min_events: int = 3
    max_events: int = 10
    alphabet: int = 10
    span_ms: int = 30 * DAY_MS
    seed: int = 0
    start_ms: int = parse_instant("2020-01-01T00:00:00Z")
    # probability that the next activity is the successor of the previous one in the alphabet
    drift: float = 0.7

    def __post_init__(self):
        if self.traces < 0:
            raise ValueError("trace count must be non-negative")
        if not 1 <= self.min_events <= self.max_events:
            raise ValueError(f"need 1 <= min events <= max events, got {self.min_events}..{self.max_events}")
        if self.alphabet < 1:
            raise ValueError("alphabet must hold at least one activity")
        if self.span_ms <= 0:
            raise ValueError("time span must be positive")
        if not 0.0 <= self.drift <= 1.0:
            raise ValueError("drift must lie in [0, 1]")


def activity_name(i: int) -> str:
    return f"task_{i:03d}"


def generate_records(spec: SyntheticSpec) -> Iterator[TraceRecord]:
    """Traces start in increasing time order, evenly spread over the span.

    Gaps between consecutive events are uniform in [1 s, span / (10 * max events)],
    so a trace typically lasts a small fraction of the span.
    """
    rng = random.Random(spec.seed)
    names = [activity_name(i) for i in range(spec.alphabet)]
    slot = spec.span_ms / max(spec.traces, 1)
    max_gap = max(1000, spec.span_ms // (10 * spec.max_events))
    for i in range(spec.traces):
        ts = spec.start_ms + int((i + rng.random()) * slot * 0.9)
        n = rng.randint(spec.min_events, spec.max_events)
        act = rng.randrange(spec.alphabet)
        events = []
        for _ in range(n):
            events.append((names[act], ts))
            ts += rng.randint(1000, max_gap)
            if rng.random() < spec.drift:
                act = (act + 1) % spec.alphabet
            else:
                act = rng.randrange(spec.alphabet)
        yield TraceRecord(f"case_{i:07d}", events)


def write_xes(records, stream, log_name: str = "synthetic"):
    """Write records as a minimal XES document (text stream)."""
    w = stream.write
    w('<?xml version="1.0" encoding="UTF-8"?>\n')
    w('<log xes.version="1849-2016" xmlns="http://www.xes-standard.org/">\n')
    w(f'  <string key="concept:name" value={quoteattr(log_name)}/>\n')
    for rec in records:
        w("  <trace>\n")
        w(f'    <string key="concept:name" value={quoteattr(rec.case_name)}/>\n')
        for activity, ts in rec.events:
            w("    <event>\n")
            w(f'      <string key="concept:name" value={quoteattr(activity)}/>\n')
            w(f'      <date key="time:timestamp" value="{format_instant(ts)}"/>\n')
            w("    </event>\n")
        w("  </trace>\n")
    w("</log>\n")


def write_log(spec: SyntheticSpec, stream, format: str = "xes", log_name: str = "synthetic"):
    records = generate_records(spec)
    if format == "xes":
        write_xes(records, stream, log_name)
    elif format == "csv":
        write_csv(records, stream)
    else:
        raise ValueError(f"unknown format {format!r}")
