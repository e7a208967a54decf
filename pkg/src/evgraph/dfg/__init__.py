from ..timeutil import TimeWindow
from .dice import DiceResult, check_accumulative, dice
from .export import ExportFormat, export_dfg
from .matrix import DfgFilter, DfgMatrix
from .naive import dfg_naive
from .scan import ScanReport, dfg_scan

__all__ = [
    "DfgFilter", "DfgMatrix", "DiceResult", "ExportFormat", "ScanReport", "TimeWindow",
    "check_accumulative", "dfg_naive", "dfg_scan", "dice", "export_dfg",
]
