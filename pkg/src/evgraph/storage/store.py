"""Disk-backed, append-only event graph store.

One file per node kind and per relation kind, each a 6-byte header
followed by fixed-width little-endian records (see FORMAT.md). Event->Event
edges carry the activity ids and timestamps of both endpoints so the DFG
is a single sequential pass over one file. A zone map with per-block
timestamp ranges lets window scans skip blocks that cannot match.
"""

from __future__ import annotations

import fcntl
import logging
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from ..errors import (
    CorruptStore,
    DuplicateLog,
    KindMismatch,
    SoundnessRequired,
    StoreError,
    StoreLocked,
    UnknownNode,
)
from ..graph import (
    ACTIVITY_KEY,
    AttributeData,
    EventData,
    EventRepository,
    LogData,
    NodeKind,
    RelationKind,
    TraceData,
    validate_soundness,
)
from ..timeutil import TimeWindow
from . import format as fmt
from .budget import MemoryBudget, MiB

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 256 * MiB
# working bytes per edge record while scanning: the read buffer, filter masks, filtered copy
SCAN_BYTES_PER_EDGE = 96
MAX_CHUNK_EDGES = 1 << 16

_NODE_FILES = {
    NodeKind.LOG: "log.evg",
    NodeKind.TRACE: "trace.evg",
    NodeKind.EVENT: "event.evg",
    NodeKind.ATTRIBUTE: "attribute.evg",
}
_REL_FILES = {
    RelationKind.LOG_TRACE: "rel_log_trace.evg",
    RelationKind.TRACE_EVENT: "rel_trace_event.evg",
    RelationKind.EVENT_EVENT: "rel_event_event.evg",
    RelationKind.EVENT_ATTRIBUTE: "rel_event_attribute.evg",
}
EDGE_FILE = _REL_FILES[RelationKind.EVENT_EVENT]
ZONE_FILE = "zone_event_event.evg"


@dataclass
class StoreStats:
    nodes: dict = field(default_factory=dict)
    relations: dict = field(default_factory=dict)
    activities: int = 0

    def as_lines(self) -> list[str]:
        lines = [f"{k.value.lower()}s={v}" for k, v in self.nodes.items()]
        lines += [f"{k.value}={v}" for k, v in self.relations.items()]
        lines.append(f"activities={self.activities}")
        return lines


@dataclass
class WriteStats:
    logs: int = 0
    traces: int = 0
    events: int = 0
    attributes: int = 0
    activities: int = 0
    ee_edges: int = 0

    def __add__(self, other):
        return WriteStats(*(a + b for a, b in zip(self.astuple(), other.astuple())))

    def astuple(self):
        return (self.logs, self.traces, self.events, self.attributes, self.activities, self.ee_edges)


class Edge(NamedTuple):
    src: int
    dst: int
    src_activity: int
    dst_activity: int
    src_ts: int
    dst_ts: int


class GraphStore:
    """Open with :meth:`open`; close explicitly or use as a context manager."""

    def __init__(self, path: Path, budget: MemoryBudget):
        self.path = Path(path)
        self.budget = budget
        self._lock_fd = None
        self._lock_depth = 0
        self.closed = False
        self._load_state()

    @classmethod
    def open(cls, path, budget: MemoryBudget | int | None = None, *, create: bool = True) -> "GraphStore":
        if not create and not (Path(path) / "event.evg").exists():
            raise StoreError(f"no store at {path}")
        if budget is None:
            budget = MemoryBudget(DEFAULT_BUDGET)
        elif isinstance(budget, int):
            budget = MemoryBudget(budget)
        path = Path(path)
        try:
            path.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StoreError(f"cannot create store directory {path}: {exc}") from exc
        if not path.is_dir():
            raise StoreError(f"{path} is not a directory")
        for name in fmt.FILES:
            p = path / name
            if not p.exists():
                with open(p, "wb") as f:
                    f.write(fmt.header_bytes())
                    f.flush()
                    os.fsync(f.fileno())
            else:
                with open(p, "rb") as f:
                    fmt.check_header(f.read(fmt.HEADER_SIZE), name)
        return cls(path, budget)

    def close(self):
        self._release_lock(force=True)
        self.closed = True

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- state ------------------------------------------------------------

    def _file(self, name: str) -> Path:
        return self.path / name

    def _count(self, name: str) -> int:
        size = os.path.getsize(self._file(name)) - fmt.HEADER_SIZE
        return max(size, 0) // fmt.FILES[name].itemsize

    def _read(self, name: str, start: int = 0, stop: int | None = None) -> np.ndarray:
        dtype = fmt.FILES[name]
        n = self._count(name)
        stop = n if stop is None else min(stop, n)
        if start >= stop:
            return np.empty(0, dtype=dtype)
        with open(self._file(name), "rb") as f:
            f.seek(fmt.HEADER_SIZE + start * dtype.itemsize)
            return np.fromfile(f, dtype=dtype, count=stop - start)

    def _read_tail_id(self, name: str) -> int:
        n = self._count(name)
        if n == 0:
            return -1
        return int(self._read(name, n - 1, n)["id"][0])

    def _load_state(self):
        with open(self._file("dict.evg"), "rb") as f:
            body = f.read()[fmt.HEADER_SIZE:]
        self._activities, self._dict_bytes = fmt.decode_dict(body)
        self._activity_ids = {name: i for i, name in enumerate(self._activities)}
        if len(self._activity_ids) != len(self._activities):
            raise CorruptStore("dict.evg: duplicate activity names")
        attrs = self._read("attribute.evg")
        self._attr_node = {}
        for node, act in zip(attrs["id"].tolist(), attrs["activity"].tolist()):
            if act >= len(self._activities) or act in self._attr_node:
                raise CorruptStore(f"attribute.evg: bad activity id {act} on node {node}")
            self._attr_node[act] = node
        self._strings_size = os.path.getsize(self._file("strings.evg")) - fmt.HEADER_SIZE
        logs = self._read("log.evg")
        self._log_ids = {}
        for node, off, n in zip(logs["id"].tolist(), logs["name_off"].tolist(), logs["name_len"].tolist()):
            self._log_ids[self._string(off, n)] = node
        self._next_id = max(self._read_tail_id(name) for name in _NODE_FILES.values()) + 1

    def _string(self, off: int, n: int) -> str:
        if off + n > self._strings_size:
            raise CorruptStore(f"strings.evg: reference {off}+{n} beyond heap size {self._strings_size}")
        with open(self._file("strings.evg"), "rb") as f:
            f.seek(fmt.HEADER_SIZE + off)
            return f.read(n).decode("utf-8")

    def _strings(self, offs, lens) -> list[str]:
        with open(self._file("strings.evg"), "rb") as f:
            heap = f.read()[fmt.HEADER_SIZE:]
        out = []
        for off, n in zip(offs, lens):
            if off + n > len(heap):
                raise CorruptStore(f"strings.evg: reference {off}+{n} beyond heap size {len(heap)}")
            out.append(heap[off:off + n].decode("utf-8"))
        return out

    @property
    def activities(self) -> list[str]:
        """Activity names indexed by their dense id."""
        return list(self._activities)

    def activity_id(self, name: str) -> int | None:
        return self._activity_ids.get(name)

    def log_names(self) -> list[str]:
        return list(self._log_ids)

    def log_id(self, name: str) -> int | None:
        return self._log_ids.get(name)

    def stats(self) -> StoreStats:
        return StoreStats(
            nodes={k: self._count(name) for k, name in _NODE_FILES.items()},
            relations={k: self._count(name) for k, name in _REL_FILES.items()},
            activities=len(self._activities),
        )

    def edge_count(self) -> int:
        return self._count(EDGE_FILE)

    # -- writing ------------------------------------------------------------

    def _acquire_lock(self):
        if self._lock_depth == 0:
            fd = os.open(self._file("LOCK"), os.O_RDWR | os.O_CREAT, 0o644)
            try:
                fcntl.flock(fd, fcntl.LOCK_EX | fcntl.LOCK_NB)
            except BlockingIOError:
                os.close(fd)
                raise StoreLocked(f"{self.path} is locked by another writer") from None
            self._lock_fd = fd
        self._lock_depth += 1

    def _release_lock(self, force=False):
        if self._lock_depth == 0:
            return
        self._lock_depth = 0 if force else self._lock_depth - 1
        if self._lock_depth == 0:
            fcntl.flock(self._lock_fd, fcntl.LOCK_UN)
            os.close(self._lock_fd)
            self._lock_fd = None

    @contextmanager
    def writing(self):
        """Hold the single-writer lock; on error, truncate every file back to where it was."""
        if self.closed:
            raise StoreError("store is closed")
        outer = self._lock_depth == 0
        self._acquire_lock()
        sizes = None
        try:
            if outer:
                self._drop_torn_tails()
                sizes = {name: os.path.getsize(self._file(name)) for name in fmt.FILES}
            yield self
        except BaseException:
            if sizes is not None:
                for name, size in sizes.items():
                    os.truncate(self._file(name), size)
                self._load_state()
            raise
        finally:
            self._release_lock()

    def _drop_torn_tails(self):
        for name, dtype in fmt.FILES.items():
            if dtype is None:
                continue
            whole = fmt.HEADER_SIZE + self._count(name) * dtype.itemsize
            if os.path.getsize(self._file(name)) != whole:
                log.warning("%s: dropping torn tail record", name)
                os.truncate(self._file(name), whole)
        whole = fmt.HEADER_SIZE + self._dict_bytes
        if os.path.getsize(self._file("dict.evg")) != whole:
            log.warning("dict.evg: dropping torn tail entry")
            os.truncate(self._file("dict.evg"), whole)

    def persist(self, repo: EventRepository, into_log: str | None = None) -> WriteStats:
        """Append a sound repository to the store.

        With ``into_log``, the repository must hold exactly one log whose
        traces are attached to the already stored log of that name (used by
        chunked ingestion); the repository's own log node is not written.
        """
        report = validate_soundness(repo)
        if not report.is_sound:
            raise SoundnessRequired(report)
        with self.writing():
            return self._persist(repo, into_log)

    def _persist(self, repo: EventRepository, into_log: str | None) -> WriteStats:
        stats = WriteStats()
        ids: dict[int, int] = {}
        next_id = self._next_id
        strings = bytearray()
        strings_base = self._strings_size

        def alloc():
            nonlocal next_id
            next_id += 1
            return next_id - 1

        def intern(text: str):
            raw = text.encode("utf-8")
            off = strings_base + len(strings)
            strings.extend(raw)
            return off, len(raw)

        log_rows = []
        repo_logs = sorted(repo.nodes(NodeKind.LOG))
        if into_log is not None:
            if into_log not in self._log_ids:
                raise UnknownNode(f"no stored log named {into_log!r}")
            if len(repo_logs) != 1:
                raise StoreError("appending into a stored log needs a repository with exactly one log")
            ids[repo_logs[0]] = self._log_ids[into_log]
        else:
            seen = set()
            for node in repo_logs:
                name = repo.data(node).name
                if name in self._log_ids or name in seen:
                    raise DuplicateLog(f"log {name!r} already exists in store")
                seen.add(name)
                ids[node] = alloc()
                log_rows.append((ids[node], *intern(name)))
        new_log_ids = {repo.data(n).name: ids[n] for n in repo_logs} if into_log is None else {}

        new_names = []
        attr_rows = []
        act_of_attr: dict[int, int] = {}
        activity_ids = dict(self._activity_ids)
        attr_node = dict(self._attr_node)
        for node in sorted(repo.nodes(NodeKind.ATTRIBUTE)):
            data = repo.data(node)
            if data.key != ACTIVITY_KEY:
                raise StoreError(f"only {ACTIVITY_KEY!r} attributes can be stored, got {data.key!r}")
            act = activity_ids.get(data.val)
            if act is None:
                act = activity_ids[data.val] = len(activity_ids)
                new_names.append(data.val)
            if act not in attr_node:
                attr_node[act] = alloc()
                attr_rows.append((attr_node[act], act))
            ids[node] = attr_node[act]
            act_of_attr[node] = act

        trace_rows, lt_rows = [], []
        event_ids, event_ts, event_ord, te_rows, ea_rows, event_act = [], [], [], [], [], {}
        for trace in sorted(repo.nodes(NodeKind.TRACE)):
            ids[trace] = tid = alloc()
            trace_rows.append((tid, *intern(repo.data(trace).case_name)))
            (log_node,) = repo.predecessors(trace)
            lt_rows.append((ids[log_node], tid))
            for ev in repo.trace_events(trace):
                ids[ev] = eid = alloc()
                data = repo.data(ev)
                event_ids.append(eid)
                event_ts.append(data.timestamp)
                event_ord.append(data.ordinal)
                te_rows.append((tid, eid))
                for a in repo.successors(ev):
                    if repo.kind(a) is NodeKind.ATTRIBUTE:
                        ea_rows.append((eid, ids[a]))
                        event_act[eid] = act_of_attr[a]
        if len(event_ids) != repo.count(NodeKind.EVENT):
            raise KindMismatch("repository has events outside any trace")

        edges = []
        ts_of = dict(zip(event_ids, event_ts))
        for ev in sorted(repo.nodes(NodeKind.EVENT), key=ids.__getitem__):
            for nxt in repo.successors(ev):
                if repo.kind(nxt) is NodeKind.EVENT:
                    s, d = ids[ev], ids[nxt]
                    edges.append((s, d, event_act[s], event_act[d], ts_of[s], ts_of[d]))

        # strings and dictionary first so no record ever points at missing bytes
        self._append_raw("strings.evg", bytes(strings))
        dict_blob = b"".join(fmt.encode_dict_entry(activity_ids[n], n) for n in new_names)
        self._append_raw("dict.evg", dict_blob)
        self._append("attribute.evg", attr_rows)
        self._append("log.evg", log_rows)
        self._append("trace.evg", trace_rows)
        ev = np.empty(len(event_ids), dtype=fmt.EVENT_DTYPE)
        ev["id"] = event_ids
        ev["ts"] = event_ts
        ev["ordinal"] = event_ord
        self._append("event.evg", ev)
        self._append("rel_log_trace.evg", lt_rows)
        self._append("rel_trace_event.evg", te_rows)
        self._append("rel_event_attribute.evg", ea_rows)
        first_edge = self.edge_count()
        edge_arr = np.array(edges, dtype=fmt.EDGE_DTYPE) if edges else np.empty(0, fmt.EDGE_DTYPE)
        self._append(EDGE_FILE, edge_arr)
        self._append(ZONE_FILE, _zones(edge_arr, first_edge))

        self._next_id = next_id
        self._strings_size += len(strings)
        self._dict_bytes += len(dict_blob)
        for n in new_names:
            self._activity_ids[n] = len(self._activities)
            self._activities.append(n)
        self._attr_node = attr_node
        self._log_ids.update(new_log_ids)

        stats.logs = len(log_rows)
        stats.traces = len(trace_rows)
        stats.events = len(event_ids)
        stats.attributes = len(attr_rows)
        stats.activities = len(new_names)
        stats.ee_edges = len(edges)
        return stats

    def _append_raw(self, name: str, blob: bytes):
        if not blob:
            return
        with open(self._file(name), "ab") as f:
            f.write(blob)
            f.flush()
            os.fsync(f.fileno())

    def _append(self, name: str, rows):
        if len(rows) == 0:
            return
        arr = rows if isinstance(rows, np.ndarray) else np.array(rows, dtype=fmt.FILES[name])
        self._append_raw(name, arr.tobytes())

    # -- scanning -------------------------------------------------------------

    def edge_ranges(self, window: TimeWindow | None = None) -> list[tuple[int, int]]:
        """Record ranges of the edge file that may hold edges inside ``window``.

        Adjacent surviving zone blocks are coalesced. Edges not covered by
        the zone map (a torn zone file) are always included.
        """
        total = self.edge_count()
        if total == 0:
            return []
        zones = self._read(ZONE_FILE)
        ranges: list[list[int]] = []
        covered = 0
        for first, count, smin, smax, dmin, dmax in zones.tolist():
            if first != covered:
                break
            stop = min(first + count, total)
            keep = window is None or not (
                (window.start is not None and (smax < window.start or dmax < window.start))
                or (window.end is not None and (smin > window.end or dmin > window.end)))
            if keep and stop > first:
                if ranges and ranges[-1][1] == first:
                    ranges[-1][1] = stop
                else:
                    ranges.append([first, stop])
            covered = stop
            if covered >= total:
                break
        if covered < total:
            if ranges and ranges[-1][1] == covered:
                ranges[-1][1] = total
            else:
                ranges.append([covered, total])
        return [tuple(r) for r in ranges]

    def scan_event_edges(self, window: TimeWindow | None = None, *,
                         ranges: list[tuple[int, int]] | None = None,
                         chunk_edges: int | None = None,
                         budget: MemoryBudget | None = None) -> Iterator[np.ndarray]:
        """Yield structured arrays of Event->Event edges with both endpoint timestamps in ``window``.

        Each yielded array may be a view into a reused read buffer; it is
        valid until the iterator is advanced. The read buffer and filter
        temporaries are leased from ``budget`` (the store's by default).
        """
        for batch, mask in self._edge_batches(window, ranges, chunk_edges, budget):
            yield batch if mask is None else batch[mask]

    def scan_edge_activities(self, window: TimeWindow | None = None, *,
                             ranges: list[tuple[int, int]] | None = None,
                             chunk_edges: int | None = None,
                             budget: MemoryBudget | None = None) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Like :meth:`scan_event_edges` but yields only ``(src activity ids, dst activity ids)``.

        Masking two narrow columns is much cheaper than copying whole records.
        """
        for batch, mask in self._edge_batches(window, ranges, chunk_edges, budget):
            if mask is None:
                yield batch["src_act"], batch["dst_act"]
            else:
                yield batch["src_act"][mask], batch["dst_act"][mask]

    def _edge_batches(self, window, ranges, chunk_edges, budget):
        """Read edge records chunk by chunk; yield ``(batch, mask)`` with ``mask`` None when all rows match.

        Batches with no matching row are skipped.
        """
        budget = budget or self.budget
        window = window or TimeWindow()
        if ranges is None:
            ranges = self.edge_ranges(window)
        if not ranges:
            return
        if chunk_edges is None:
            chunk_edges = max(1, min(MAX_CHUNK_EDGES, budget.available() // 2 // SCAN_BYTES_PER_EDGE))
        itemsize = fmt.EDGE_DTYPE.itemsize
        largest = max(stop - start for start, stop in ranges)
        chunk_edges = max(1, min(chunk_edges, largest))
        with budget.reserve(chunk_edges * SCAN_BYTES_PER_EDGE, "edge scan buffer"):
            buf = bytearray(chunk_edges * itemsize)
            view = memoryview(buf)
            lo, hi = window.start, window.end
            with open(self._file(EDGE_FILE), "rb", buffering=0) as f:
                for start, stop in ranges:
                    pos = start
                    f.seek(fmt.HEADER_SIZE + start * itemsize)
                    while pos < stop:
                        n = min(chunk_edges, stop - pos)
                        got = f.readinto(view[:n * itemsize])
                        if got != n * itemsize:
                            raise CorruptStore(f"{EDGE_FILE}: short read at record {pos}")
                        batch = np.frombuffer(buf, dtype=fmt.EDGE_DTYPE, count=n)
                        pos += n
                        if lo is None and hi is None:
                            yield batch, None
                            continue
                        mask = None
                        if lo is not None:
                            mask = batch["src_ts"] >= lo
                            mask &= batch["dst_ts"] >= lo
                        if hi is not None:
                            upper = batch["src_ts"] <= hi
                            upper &= batch["dst_ts"] <= hi
                            mask = upper if mask is None else (mask & upper)
                            del upper
                        if mask.all():
                            yield batch, None
                        elif mask.any():
                            yield batch, mask
                        del mask
            del batch

    def iter_event_edges(self, window: TimeWindow | None = None) -> Iterator[Edge]:
        for batch in self.scan_event_edges(window):
            for row in batch.tolist():
                yield Edge(*row)

    def _iter_event_chunks(self, chunk: int = 1 << 16) -> Iterator[np.ndarray]:
        total = self._count("event.evg")
        for start in range(0, total, chunk):
            yield self._read("event.evg", start, start + chunk)

    def time_bounds(self) -> tuple[int, int] | None:
        lo = hi = None
        for arr in self._iter_event_chunks():
            a, b = int(arr["ts"].min()), int(arr["ts"].max())
            lo = a if lo is None else min(lo, a)
            hi = b if hi is None else max(hi, b)
        return None if lo is None else (lo, hi)

    def count_events(self, window: TimeWindow | None = None) -> int:
        window = window or TimeWindow()
        n = 0
        for arr in self._iter_event_chunks():
            ts = arr["ts"]
            mask = np.ones(len(ts), dtype=bool)
            if window.start is not None:
                mask &= ts >= window.start
            if window.end is not None:
                mask &= ts <= window.end
            n += int(mask.sum())
        return n

    # -- read-back ----------------------------------------------------------------

    def load_repository(self) -> EventRepository:
        """Rebuild the whole store as an in-memory repository keyed by stored node ids.

        Nothing is checked beyond referential integrity, so an unsound store
        loads fine and can then be validated.
        """
        repo = EventRepository()
        logs = self._read("log.evg")
        for node, name in zip(logs["id"].tolist(), self._strings(logs["name_off"].tolist(), logs["name_len"].tolist())):
            repo._insert_node(node, LogData(name))
        traces = self._read("trace.evg")
        for node, name in zip(traces["id"].tolist(),
                              self._strings(traces["name_off"].tolist(), traces["name_len"].tolist())):
            repo._insert_node(node, TraceData(name))
        events = self._read("event.evg")
        for node, ts, ordinal in events.tolist():
            repo._insert_node(node, EventData(ts, ordinal))
        for node, act in self._read("attribute.evg").tolist():
            repo._insert_node(node, AttributeData(ACTIVITY_KEY, self._activities[act]))
        try:
            for name in ("rel_log_trace.evg", "rel_trace_event.evg", "rel_event_attribute.evg"):
                for src, dst in self._read(name).tolist():
                    repo._insert_relation(src, dst)
            for row in self._read(EDGE_FILE).tolist():
                repo._insert_relation(row[0], row[1])
        except (UnknownNode, KindMismatch) as exc:
            raise CorruptStore(f"bad relation record: {exc}") from exc
        return repo

    def verify(self) -> list[str]:
        """Full scan checking denormalized edge fields against the node files."""
        problems = []
        events = self._read("event.evg")
        ts_of = dict(zip(events["id"].tolist(), events["ts"].tolist()))
        attrs = self._read("attribute.evg")
        act_of_attr = dict(zip(attrs["id"].tolist(), attrs["activity"].tolist()))
        act_of = {}
        for ev, attr in self._read("rel_event_attribute.evg").tolist():
            act_of[ev] = act_of_attr.get(attr)
        for i, (s, d, sa, da, st, dt) in enumerate(self._read(EDGE_FILE).tolist()):
            if ts_of.get(s) != st or ts_of.get(d) != dt:
                problems.append(f"edge {i} ({s}->{d}): timestamps disagree with event.evg")
            if act_of.get(s) != sa or act_of.get(d) != da:
                problems.append(f"edge {i} ({s}->{d}): activity ids disagree with attribute links")
        stats = self.stats()
        if stats.nodes[NodeKind.ATTRIBUTE] != len(self._activities):
            problems.append("attribute node count differs from dictionary size")
        return problems

    def iter_traces(self) -> Iterator[tuple[str, str, list[tuple[str, int]]]]:
        """Yield ``(log name, case name, [(activity, ts), ...])`` in stored order.

        Relies on the writer's layout: events, their trace links and their
        activity links are appended in the same order.
        """
        logs = self._read("log.evg")
        log_name = dict(zip(logs["id"].tolist(), self._strings(logs["name_off"].tolist(), logs["name_len"].tolist())))
        traces = self._read("trace.evg")
        case_name = dict(zip(traces["id"].tolist(),
                             self._strings(traces["name_off"].tolist(), traces["name_len"].tolist())))
        trace_log = {t: l for l, t in self._read("rel_log_trace.evg").tolist()}
        attrs = self._read("attribute.evg")
        act_of_attr = dict(zip(attrs["id"].tolist(), attrs["activity"].tolist()))
        total = self._count("event.evg")
        if self._count("rel_trace_event.evg") != total or self._count("rel_event_attribute.evg") != total:
            raise CorruptStore("event, trace-event and event-attribute files are not aligned")
        current, rows = None, []
        step = 1 << 16
        for start in range(0, total, step):
            ev = self._read("event.evg", start, start + step)
            te = self._read("rel_trace_event.evg", start, start + step)
            ea = self._read("rel_event_attribute.evg", start, start + step)
            if not (np.array_equal(ev["id"], te["dst"]) and np.array_equal(ev["id"], ea["src"])):
                raise CorruptStore(f"event records misaligned near record {start}")
            for trace, ts, attr in zip(te["src"].tolist(), ev["ts"].tolist(), ea["dst"].tolist()):
                if trace != current:
                    if current is not None:
                        yield log_name[trace_log[current]], case_name[current], rows
                    current, rows = trace, []
                rows.append((self._activities[act_of_attr[attr]], ts))
        if current is not None:
            yield log_name[trace_log[current]], case_name[current], rows


def _zones(edges: np.ndarray, first: int) -> np.ndarray:
    n = len(edges)
    blocks = (n + fmt.ZONE_EDGES - 1) // fmt.ZONE_EDGES
    zones = np.empty(blocks, dtype=fmt.ZONE_DTYPE)
    for b in range(blocks):
        part = edges[b * fmt.ZONE_EDGES:(b + 1) * fmt.ZONE_EDGES]
        zones[b] = (first + b * fmt.ZONE_EDGES, len(part),
                    part["src_ts"].min(), part["src_ts"].max(),
                    part["dst_ts"].min(), part["dst_ts"].max())
    return zones
