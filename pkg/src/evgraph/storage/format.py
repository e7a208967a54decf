"""On-disk record layouts. FORMAT.md at the repository root is the prose version."""

from __future__ import annotations

import struct

import numpy as np

from ..errors import CorruptStore, VersionMismatch

MAGIC = b"EVGR"
VERSION = 1
HEADER = struct.Struct("<4sH")
HEADER_SIZE = HEADER.size

LOG_DTYPE = np.dtype([("id", "<u8"), ("name_off", "<u8"), ("name_len", "<u4")])
TRACE_DTYPE = LOG_DTYPE
EVENT_DTYPE = np.dtype([("id", "<u8"), ("ts", "<i8"), ("ordinal", "<u4")])
ATTRIBUTE_DTYPE = np.dtype([("id", "<u8"), ("activity", "<u4")])
PAIR_DTYPE = np.dtype([("src", "<u8"), ("dst", "<u8")])
EDGE_DTYPE = np.dtype([("src", "<u8"), ("dst", "<u8"),
                       ("src_act", "<u4"), ("dst_act", "<u4"),
                       ("src_ts", "<i8"), ("dst_ts", "<i8")])
ZONE_DTYPE = np.dtype([("first", "<u8"), ("count", "<u4"),
                       ("src_min", "<i8"), ("src_max", "<i8"),
                       ("dst_min", "<i8"), ("dst_max", "<i8")])
DICT_ENTRY = struct.Struct("<IH")

ZONE_EDGES = 8192

# file name -> record dtype; None marks the two variable-length files
FILES = {
    "log.evg": LOG_DTYPE,
    "trace.evg": TRACE_DTYPE,
    "event.evg": EVENT_DTYPE,
    "attribute.evg": ATTRIBUTE_DTYPE,
    "rel_log_trace.evg": PAIR_DTYPE,
    "rel_trace_event.evg": PAIR_DTYPE,
    "rel_event_event.evg": EDGE_DTYPE,
    "rel_event_attribute.evg": PAIR_DTYPE,
    "zone_event_event.evg": ZONE_DTYPE,
    "dict.evg": None,
    "strings.evg": None,
}


def header_bytes() -> bytes:
    return HEADER.pack(MAGIC, VERSION)


def check_header(raw: bytes, name: str):
    if len(raw) < HEADER_SIZE:
        raise CorruptStore(f"{name}: truncated header")
    magic, version = HEADER.unpack(raw[:HEADER_SIZE])
    if magic != MAGIC:
        raise CorruptStore(f"{name}: bad magic {magic!r}")
    if version != VERSION:
        raise VersionMismatch(f"{name}: format version {version}, this build reads {VERSION}")


def encode_dict_entry(activity_id: int, name: str) -> bytes:
    raw = name.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError(f"activity name longer than 65535 bytes: {name[:40]!r}...")
    return DICT_ENTRY.pack(activity_id, len(raw)) + raw


def decode_dict(body: bytes) -> tuple[list[str], int]:
    """Decode dictionary entries; returns names and the byte length of whole entries."""
    names = []
    pos = 0
    while pos + DICT_ENTRY.size <= len(body):
        activity_id, n = DICT_ENTRY.unpack_from(body, pos)
        end = pos + DICT_ENTRY.size + n
        if end > len(body):
            break
        if activity_id != len(names):
            raise CorruptStore(f"dict.evg: id {activity_id} out of sequence at offset {pos}")
        names.append(body[pos + DICT_ENTRY.size:end].decode("utf-8"))
        pos = end
    return names, pos
