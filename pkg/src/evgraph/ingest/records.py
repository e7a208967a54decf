from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class TraceRecord:
    """One case: its name and its (activity, epoch-ms) events in execution order."""

    case_name: str
    events: list[tuple[str, int]] = field(default_factory=list)
    reordered: bool = False

    def normalized(self) -> "TraceRecord":
        """Stable-sort events by timestamp, flagging the record if that changed anything."""
        ts = [t for _, t in self.events]
        if all(a <= b for a, b in zip(ts, ts[1:])):
            return self
        return TraceRecord(self.case_name, sorted(self.events, key=lambda e: e[1]), True)
