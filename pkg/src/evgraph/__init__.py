"""Disk-backed event-log graph store with budgeted directly-follows graph computation."""

from .access import AccessPolicy, RoleGrant, authorize, dfg_scan_as, load_policy
from .dfg import DfgFilter, DfgMatrix, ExportFormat, TimeWindow, dfg_naive, dfg_scan, dice, export_dfg
from .graph import (
    EventRepository,
    NodeKind,
    RelationKind,
    SoundnessReport,
    Violation,
    validate_soundness,
)
from .ingest import ColumnMapping, TraceRecord, ingest, parse_csv, parse_xes
from .storage import GraphStore, MemoryBudget

__all__ = [
    "AccessPolicy", "ColumnMapping", "DfgFilter", "DfgMatrix", "EventRepository", "ExportFormat",
    "GraphStore", "MemoryBudget", "NodeKind", "RelationKind", "RoleGrant", "SoundnessReport",
    "TimeWindow", "TraceRecord", "Violation", "authorize", "dfg_naive", "dfg_scan", "dfg_scan_as",
    "dice", "export_dfg", "ingest", "load_policy", "parse_csv", "parse_xes", "validate_soundness",
]
