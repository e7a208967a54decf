"""Cooperative memory accounting.

Engine code asks the budget for a lease before allocating a working
buffer and returns it afterwards. Nothing is enforced by the OS; the
point is that every large buffer on the DFG path goes through here, so
the high-water mark is observable and testable.
"""

from __future__ import annotations

import threading
from typing import Callable

from ..errors import MemoryBudgetExceeded

MiB = 1 << 20


class Lease:
    __slots__ = ("_budget", "nbytes", "what")

    def __init__(self, budget: "MemoryBudget", nbytes: int, what: str):
        self._budget = budget
        self.nbytes = nbytes
        self.what = what

    def resize(self, nbytes: int):
        self._budget._adjust(self, nbytes)

    def release(self):
        if self._budget is not None:
            self._budget._adjust(self, 0)
            self._budget = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.release()


class MemoryBudget:
    def __init__(self, limit: int):
        if limit <= 0:
            raise ValueError("memory budget must be positive")
        self.limit = int(limit)
        self.live = 0
        self.peak = 0
        self._lock = threading.Lock()
        self._hooks: list[Callable[[int, int, str], None]] = []

    @classmethod
    def mebibytes(cls, n: float) -> "MemoryBudget":
        return cls(int(n * MiB))

    def add_hook(self, hook: Callable[[int, int, str], None]):
        """Register ``hook(live, delta, what)``, called after every change."""
        self._hooks.append(hook)

    def reserve(self, nbytes: int, what: str = "") -> Lease:
        lease = Lease(self, 0, what)
        self._adjust(lease, int(nbytes))
        return lease

    def available(self) -> int:
        with self._lock:
            return self.limit - self.live

    def reset_peak(self):
        with self._lock:
            self.peak = self.live

    def _adjust(self, lease: Lease, nbytes: int):
        with self._lock:
            delta = nbytes - lease.nbytes
            if delta > 0 and self.live + delta > self.limit:
                raise MemoryBudgetExceeded(
                    f"{lease.what or 'buffer'} needs {delta} bytes; "
                    f"{self.live} of {self.limit} already in use")
            self.live += delta
            lease.nbytes = nbytes
            if self.live > self.peak:
                self.peak = self.live
            live = self.live
        for hook in self._hooks:
            hook(live, delta, lease.what)

    def __repr__(self):
        return f"MemoryBudget(limit={self.limit}, live={self.live}, peak={self.peak})"
