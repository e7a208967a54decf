"""CSV event logs: one row per event, a header row, UTF-8.

Timestamp formats are either one of the names ``iso`` (ISO-8601, the
default), ``epoch_ms``, ``epoch_s``, or a ``strptime`` pattern such as
``%d-%m-%Y %H:%M:%S``. Values without a UTC offset are taken as UTC.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import datetime
from typing import BinaryIO, Callable, Iterable, Iterator

from ..errors import MissingColumn, ParseError
from ..timeutil import format_instant, parse_instant, to_millis
from .records import TraceRecord


@dataclass(frozen=True)
class ColumnMapping:
    case_column: str = "case"
    activity_column: str = "activity"
    timestamp_column: str = "timestamp"
    timestamp_format: str = "iso"

    def __post_init__(self):
        cols = (self.case_column, self.activity_column, self.timestamp_column)
        if len(set(cols)) != 3:
            raise ValueError(f"case, activity and timestamp columns must be distinct: {cols}")


def timestamp_parser(fmt: str) -> Callable[[str], int]:
    if fmt in (None, "", "iso"):
        return parse_instant
    if fmt == "epoch_ms":
        return lambda s: int(s)
    if fmt == "epoch_s":
        return lambda s: int(round(float(s) * 1000))
    return lambda s: to_millis(datetime.strptime(s, fmt))


def parse_csv(stream: BinaryIO, mapping: ColumnMapping = ColumnMapping()) -> Iterator[TraceRecord]:
    """Group rows by case (first-appearance order) and yield one record per case.

    Within a case rows keep file order and are then stably sorted by time.
    The whole file is grouped in memory before the first record is yielded.
    """
    text = io.TextIOWrapper(stream, encoding="utf-8", newline="")
    reader = csv.reader(text)
    header = next(reader, None)
    if header is None:
        return
    if header and header[0].startswith("\ufeff"):
        header[0] = header[0][1:]
    idx = {}
    for col in (mapping.case_column, mapping.activity_column, mapping.timestamp_column):
        if col not in header:
            raise MissingColumn(f"column {col!r} not in CSV header {header}")
        idx[col] = header.index(col)
    ci, ai, ti = idx[mapping.case_column], idx[mapping.activity_column], idx[mapping.timestamp_column]
    width = max(ci, ai, ti)
    parse_ts = timestamp_parser(mapping.timestamp_format)
    cases: dict[str, list[tuple[str, int]]] = {}
    try:
        for row in reader:
            if not row:
                continue
            line = reader.line_num
            if len(row) <= width:
                raise ParseError(f"row has {len(row)} fields, need {width + 1}", line)
            case, activity, raw_ts = row[ci], row[ai], row[ti]
            if not case or not activity:
                raise ParseError("empty case or activity", line)
            try:
                ts = parse_ts(raw_ts.strip())
            except (ValueError, OverflowError):
                raise ParseError(f"unparseable timestamp {raw_ts!r}", line) from None
            cases.setdefault(case, []).append((activity, ts))
    except csv.Error as exc:
        raise ParseError(str(exc), reader.line_num) from None
    for case, events in cases.items():
        yield TraceRecord(case, events).normalized()


def write_csv(records: Iterable[TraceRecord], stream, mapping: ColumnMapping = ColumnMapping()):
    """Write records as CSV text with ISO-8601 millisecond timestamps."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow([mapping.case_column, mapping.activity_column, mapping.timestamp_column])
    for rec in records:
        for activity, ts in rec.events:
            w.writerow([rec.case_name, activity, format_instant(ts)])
