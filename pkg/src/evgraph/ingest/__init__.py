from .csvlog import ColumnMapping, parse_csv, write_csv
from .loader import IngestStats, default_log_name, export_csv, ingest, read_log, store_records
from .records import TraceRecord
from .xes import parse_xes

__all__ = [
    "ColumnMapping", "IngestStats", "TraceRecord", "default_log_name", "export_csv", "ingest",
    "parse_csv", "parse_xes", "read_log", "store_records", "write_csv",
]
