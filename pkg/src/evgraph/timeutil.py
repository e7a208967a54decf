"""Millisecond UTC instants, ISO-8601 parsing and duration strings."""

from __future__ import annotations

import re
from datetime import datetime, timedelta, timezone

from .errors import InvalidWindow

_FRACTION = re.compile(r"\.(\d+)")
_DURATION = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*(ms|s|m|h|d|w)\s*$")
_UNIT_MS = {"ms": 1, "s": 1000, "m": 60_000, "h": 3_600_000, "d": 86_400_000, "w": 604_800_000}
EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def to_millis(value) -> int:
    """Convert a datetime (naive means UTC) or an int of milliseconds to epoch milliseconds."""
    if isinstance(value, bool):
        raise TypeError("bool is not an instant")
    if isinstance(value, int):
        return value
    if isinstance(value, datetime):
        if value.tzinfo is None:
            value = value.replace(tzinfo=timezone.utc)
        delta = value - EPOCH
        return delta.days * 86_400_000 + delta.seconds * 1000 + delta.microseconds // 1000
    raise TypeError(f"cannot interpret {value!r} as an instant")


def from_millis(ms: int) -> datetime:
    return EPOCH + timedelta(milliseconds=int(ms))


def parse_instant(text: str) -> int:
    """Parse an ISO-8601 instant to epoch milliseconds.

    Accepts a trailing ``Z`` and any number of fractional digits, which
    ``datetime.fromisoformat`` on 3.10 does not.
    """
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"

    def _pad(m):
        return "." + (m.group(1) + "000000")[:6]

    s = _FRACTION.sub(_pad, s, count=1)
    try:
        if "Z" in s or "z" in s:
            raise ValueError("stray zone designator")
        return to_millis(datetime.fromisoformat(s))
    except ValueError as exc:
        raise ValueError(f"not an ISO-8601 instant: {text!r}") from exc


def format_instant(ms: int) -> str:
    dt = from_millis(ms)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


def parse_duration(text: str) -> int:
    """``1d``, ``12h``, ``30m``, ``45s``, ``250ms``, ``2w`` to milliseconds."""
    m = _DURATION.match(text)
    if not m:
        raise ValueError(f"bad duration {text!r}; expected e.g. 1d, 12h, 30m")
    ms = int(float(m.group(1)) * _UNIT_MS[m.group(2)])
    if ms <= 0:
        raise ValueError(f"duration must be positive: {text!r}")
    return ms


class TimeWindow:
    """Closed interval of epoch milliseconds; a missing bound is unbounded."""

    __slots__ = ("start", "end")

    def __init__(self, start=None, end=None):
        self.start = None if start is None else to_millis(start)
        self.end = None if end is None else to_millis(end)
        if self.start is not None and self.end is not None and self.start > self.end:
            raise InvalidWindow(
                f"window start {format_instant(self.start)} is after end {format_instant(self.end)}")

    @property
    def unbounded(self) -> bool:
        return self.start is None and self.end is None

    def contains(self, ms: int) -> bool:
        return (self.start is None or ms >= self.start) and (self.end is None or ms <= self.end)

    def __eq__(self, other):
        return isinstance(other, TimeWindow) and (self.start, self.end) == (other.start, other.end)

    def __hash__(self):
        return hash((self.start, self.end))

    def __repr__(self):
        def fmt(v):
            return "-inf" if v is None else format_instant(v)
        return f"TimeWindow({fmt(self.start)} .. {fmt(self.end)})"
