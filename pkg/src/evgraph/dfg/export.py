from __future__ import annotations

import csv
import io
from enum import Enum

from .matrix import DfgMatrix


class ExportFormat(str, Enum):
    MATRIX_CSV = "matrix"
    EDGE_CSV = "edges"
    DOT = "dot"


def export_dfg(m: DfgMatrix, format: ExportFormat | str = ExportFormat.MATRIX_CSV) -> bytes:
    format = ExportFormat(format)
    buf = io.StringIO()
    if format is ExportFormat.MATRIX_CSV:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["", *m.activities])
        for a in m.activities:
            w.writerow([a, *(m[(a, b)] for b in m.activities)])
    elif format is ExportFormat.EDGE_CSV:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dfg_from", "dfg_to", "dfg_freq"])
        for (a, b), c in m.counts.items():
            w.writerow([a, b, c])
    else:
        buf.write("digraph dfg {\n")
        for a in m.activities:
            buf.write(f"  {_dot_id(a)};\n")
        for (a, b), c in m.counts.items():
            buf.write(f'  {_dot_id(a)} -> {_dot_id(b)} [label="{c}"];\n')
        buf.write("}\n")
    return buf.getvalue().encode("utf-8")


def _dot_id(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'
