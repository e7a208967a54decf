from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ..timeutil import TimeWindow


@dataclass(frozen=True)
class DfgMatrix:
    """Directly-follows frequencies between activities.

    ``counts`` holds nonzero cells only; a missing pair means zero.
    ``activities`` is kept sorted so equal matrices compare and export equal.
    """

    activities: tuple[str, ...]
    counts: Mapping[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        acts = tuple(sorted(set(self.activities)))
        known = set(acts)
        clean = {}
        for (a, b), c in self.counts.items():
            if a not in known or b not in known:
                raise ValueError(f"pair ({a!r}, {b!r}) uses an activity outside the matrix")
            if c < 0:
                raise ValueError(f"negative count for ({a!r}, {b!r})")
            if c:
                clean[(a, b)] = int(c)
        object.__setattr__(self, "activities", acts)
        object.__setattr__(self, "counts", dict(sorted(clean.items())))

    def __getitem__(self, pair: tuple[str, str]) -> int:
        return self.counts.get(pair, 0)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def relabel(self, names: Mapping[str, str]) -> "DfgMatrix":
        return DfgMatrix(tuple(names[a] for a in self.activities),
                         {(names[a], names[b]): c for (a, b), c in self.counts.items()})


@dataclass(frozen=True)
class DfgFilter:
    window: TimeWindow = field(default_factory=TimeWindow)
    activities: frozenset[str] | None = None

    @classmethod
    def of(cls, start=None, end=None, activities: Iterable[str] | None = None) -> "DfgFilter":
        acts = frozenset(activities) if activities else None
        return cls(TimeWindow(start, end), acts)

    def allows(self, activity: str) -> bool:
        return not self.activities or activity in self.activities
