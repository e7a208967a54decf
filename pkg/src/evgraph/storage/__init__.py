from .budget import Lease, MemoryBudget, MiB
from .store import DEFAULT_BUDGET, Edge, GraphStore, StoreStats, WriteStats

__all__ = ["DEFAULT_BUDGET", "Edge", "GraphStore", "Lease", "MemoryBudget", "MiB", "StoreStats", "WriteStats"]
