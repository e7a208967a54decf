"""In-memory event repository: a property graph of logs, traces, events and attributes.

Nodes are plain integer ids. Relations are never stored with an explicit
kind; the kind follows from the endpoint kinds, and only the four
endpoint pairings Log->Trace, Trace->Event, Event->Event and
Event->Attribute are admitted.

The repository is not thread-safe for writers. Any number of threads may
read it while nobody mutates it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, NamedTuple

from .errors import (
    DuplicateCase,
    DuplicateLog,
    KindMismatch,
    NonemptyRequired,
    TimestampRegression,
    UnknownNode,
)
from .timeutil import to_millis

ACTIVITY_KEY = "concept_name"
LOG_NAME_KEY = "log_concept_name"
CASE_NAME_KEY = "case_concept_name"


class NodeKind(str, Enum):
    LOG = "Log"
    TRACE = "Trace"
    EVENT = "Event"
    ATTRIBUTE = "Attribute"

    def __str__(self):
        return self.value


class RelationKind(str, Enum):
    LOG_TRACE = "LogTrace"
    TRACE_EVENT = "TraceEvent"
    EVENT_EVENT = "EventEvent"
    EVENT_ATTRIBUTE = "EventAttribute"

    def __str__(self):
        return self.value


RELATION_ENDPOINTS = {
    RelationKind.LOG_TRACE: (NodeKind.LOG, NodeKind.TRACE),
    RelationKind.TRACE_EVENT: (NodeKind.TRACE, NodeKind.EVENT),
    RelationKind.EVENT_EVENT: (NodeKind.EVENT, NodeKind.EVENT),
    RelationKind.EVENT_ATTRIBUTE: (NodeKind.EVENT, NodeKind.ATTRIBUTE),
}
_RELATION_FOR = {ends: kind for kind, ends in RELATION_ENDPOINTS.items()}


@dataclass(frozen=True, slots=True)
class LogData:
    name: str

    @property
    def properties(self):
        return {LOG_NAME_KEY: self.name}


@dataclass(frozen=True, slots=True)
class TraceData:
    case_name: str

    @property
    def properties(self):
        return {CASE_NAME_KEY: self.case_name}


@dataclass(frozen=True, slots=True)
class EventData:
    timestamp: int  # epoch milliseconds, UTC
    ordinal: int

    @property
    def properties(self):
        return {"timestamp": self.timestamp, "ordinal": self.ordinal}


@dataclass(frozen=True, slots=True)
class AttributeData:
    key: str
    val: str

    @property
    def properties(self):
        return {self.key: self.val}


_DATA_KIND = {LogData: NodeKind.LOG, TraceData: NodeKind.TRACE,
              EventData: NodeKind.EVENT, AttributeData: NodeKind.ATTRIBUTE}


def relation_kind(src_kind: NodeKind, dst_kind: NodeKind) -> RelationKind:
    try:
        return _RELATION_FOR[(src_kind, dst_kind)]
    except KeyError:
        raise KindMismatch(f"no relation kind connects {src_kind} to {dst_kind}") from None


class Relation(NamedTuple):
    src: int
    dst: int
    kind: RelationKind


class EventRepository:
    """Mutable event repository built through ``add_log``/``add_trace``/``append_event``."""

    def __init__(self):
        self._next_id = 0
        self._kind: dict[int, NodeKind] = {}
        self._data: dict[int, object] = {}
        self._in: dict[int, set[int]] = {}
        self._out: dict[int, set[int]] = {}
        self._n_relations = 0
        self._log_by_name: dict[str, int] = {}
        self._cases: dict[int, dict[str, int]] = {}
        self._attr_by_pair: dict[tuple[str, str], int] = {}
        self._tail: dict[int, int] = {}
        self._length: dict[int, int] = {}

    # -- construction ---------------------------------------------------

    def add_log(self, name: str) -> int:
        if not name:
            raise NonemptyRequired("log name must be nonempty")
        if name in self._log_by_name:
            raise DuplicateLog(f"log {name!r} already exists")
        return self._insert_node(self._fresh_id(), LogData(name))

    def add_trace(self, log: int, case_name: str) -> int:
        self._expect(log, NodeKind.LOG)
        if not case_name:
            raise NonemptyRequired("case name must be nonempty")
        if case_name in self._cases.get(log, ()):
            raise DuplicateCase(f"case {case_name!r} already exists in log {self._data[log].name!r}")
        trace = self._insert_node(self._fresh_id(), TraceData(case_name))
        self._insert_relation(log, trace)
        self._cases.setdefault(log, {})[case_name] = trace
        self._length[trace] = 0
        return trace

    def append_event(self, trace: int, activity: str, ts) -> int:
        self._expect(trace, NodeKind.TRACE)
        if not activity:
            raise NonemptyRequired("activity name must be nonempty")
        ms = to_millis(ts)
        prev = self._tail.get(trace)
        if prev is not None and ms < self._data[prev].timestamp:
            raise TimestampRegression(
                f"event at {ms} precedes last event of trace {trace} at {self._data[prev].timestamp}")
        ordinal = self._length.get(trace, 0)
        event = self._insert_node(self._fresh_id(), EventData(ms, ordinal))
        self._insert_relation(trace, event)
        if prev is not None:
            self._insert_relation(prev, event)
        attr = self._attr_by_pair.get((ACTIVITY_KEY, activity))
        if attr is None:
            attr = self._insert_node(self._fresh_id(), AttributeData(ACTIVITY_KEY, activity))
        self._insert_relation(event, attr)
        self._tail[trace] = event
        self._length[trace] = ordinal + 1
        return event

    # -- low-level mutation (read-back from storage, fault injection) ----

    def _fresh_id(self) -> int:
        node = self._next_id
        self._next_id += 1
        return node

    def _insert_node(self, node: int, data) -> int:
        if node in self._kind:
            raise ValueError(f"node id {node} already in use")
        kind = _DATA_KIND[type(data)]
        self._kind[node] = kind
        self._data[node] = data
        self._in[node] = set()
        self._out[node] = set()
        if node >= self._next_id:
            self._next_id = node + 1
        if kind is NodeKind.LOG:
            self._log_by_name.setdefault(data.name, node)
        elif kind is NodeKind.ATTRIBUTE:
            self._attr_by_pair.setdefault((data.key, data.val), node)
        return node

    def _insert_relation(self, src: int, dst: int) -> RelationKind:
        kind = relation_kind(self.kind(src), self.kind(dst))
        out = self._out[src]
        if dst not in out:
            out.add(dst)
            self._in[dst].add(src)
            self._n_relations += 1
        return kind

    def _expect(self, node: int, kind: NodeKind):
        actual = self.kind(node)
        if actual is not kind:
            raise KindMismatch(f"node {node} is a {actual}, expected {kind}")

    # -- queries --------------------------------------------------------

    def __contains__(self, node) -> bool:
        return node in self._kind

    def __len__(self) -> int:
        return len(self._kind)

    def kind(self, node: int) -> NodeKind:
        try:
            return self._kind[node]
        except KeyError:
            raise UnknownNode(f"no node {node}") from None

    def data(self, node: int):
        self.kind(node)
        return self._data[node]

    def predecessors(self, node: int) -> frozenset[int]:
        """Nodes with a relation into ``node``."""
        self.kind(node)
        return frozenset(self._in[node])

    def successors(self, node: int) -> frozenset[int]:
        """Nodes that ``node`` has a relation to."""
        self.kind(node)
        return frozenset(self._out[node])

    def nodes(self, kind: NodeKind | None = None) -> Iterator[int]:
        if kind is None:
            return iter(self._kind)
        return (n for n, k in self._kind.items() if k is kind)

    def count(self, kind: NodeKind) -> int:
        return sum(1 for k in self._kind.values() if k is kind)

    def relations(self) -> Iterator[Relation]:
        kinds = self._kind
        for src, outs in self._out.items():
            for dst in outs:
                yield Relation(src, dst, _RELATION_FOR[(kinds[src], kinds[dst])])

    @property
    def relation_count(self) -> int:
        return self._n_relations

    def log_named(self, name: str) -> int | None:
        return self._log_by_name.get(name)

    def attribute(self, key: str, val: str) -> int | None:
        return self._attr_by_pair.get((key, val))

    def activity_attributes(self) -> list[int]:
        return [n for n, k in self._kind.items()
                if k is NodeKind.ATTRIBUTE and self._data[n].key == ACTIVITY_KEY]

    def activity_of(self, event: int) -> str | None:
        """Name of the event's activity, or None when not exactly one is linked."""
        names = [self._data[a].val for a in self._out[event]
                 if self._kind[a] is NodeKind.ATTRIBUTE and self._data[a].key == ACTIVITY_KEY]
        return names[0] if len(names) == 1 else None

    def traces(self, log: int | None = None) -> list[int]:
        if log is None:
            return list(self.nodes(NodeKind.TRACE))
        self._expect(log, NodeKind.LOG)
        return sorted(t for t in self._out[log] if self._kind[t] is NodeKind.TRACE)

    def trace_events(self, trace: int) -> list[int]:
        """Events of ``trace`` in chain order (head first).

        Falls back to ordinal order when the events do not form one chain.
        """
        self._expect(trace, NodeKind.TRACE)
        kinds = self._kind
        members = {e for e in self._out[trace] if kinds[e] is NodeKind.EVENT}
        heads = [e for e in members if not any(kinds[p] is NodeKind.EVENT for p in self._in[e])]
        if len(heads) == 1:
            chain = [heads[0]]
            while True:
                nxt = [n for n in self._out[chain[-1]] if kinds[n] is NodeKind.EVENT]
                if len(nxt) != 1 or nxt[0] not in members or len(chain) > len(members):
                    break
                chain.append(nxt[0])
            if len(chain) == len(members):
                return chain
        return sorted(members, key=lambda e: (self._data[e].ordinal, e))


class Violation(NamedTuple):
    rule: int
    node: int
    description: str


@dataclass(frozen=True)
class SoundnessReport:
    violations: tuple[Violation, ...]

    @property
    def is_sound(self) -> bool:
        return not self.violations

    def rules(self) -> set[int]:
        return {v.rule for v in self.violations}


def validate_soundness(repo: EventRepository) -> SoundnessReport:
    """Check the five structural soundness rules and list every violation.

    Rule 5 only counts attributes keyed ``concept_name``; other attribute
    links are unconstrained.
    """
    kinds = repo._kind
    data = repo._data
    ins = repo._in
    outs = repo._out
    T, E, A = NodeKind.TRACE, NodeKind.EVENT, NodeKind.ATTRIBUTE
    violations = []
    for node, kind in kinds.items():
        if kind is T:
            n = len(ins[node])
            if n != 1:
                violations.append(Violation(1, node, f"trace has {n} logs, expected exactly 1"))
        elif kind is E:
            n_trace = n_prev = 0
            for p in ins[node]:
                pk = kinds[p]
                if pk is T:
                    n_trace += 1
                elif pk is E:
                    n_prev += 1
            n_next = n_act = 0
            for s in outs[node]:
                sk = kinds[s]
                if sk is E:
                    n_next += 1
                elif sk is A and data[s].key == ACTIVITY_KEY:
                    n_act += 1
            if n_trace != 1:
                violations.append(Violation(2, node, f"event belongs to {n_trace} traces, expected exactly 1"))
            if n_prev > 1:
                violations.append(Violation(3, node, f"event has {n_prev} incoming event flows, expected at most 1"))
            if n_next > 1:
                violations.append(Violation(4, node, f"event has {n_next} outgoing event flows, expected at most 1"))
            if n_act != 1:
                violations.append(Violation(5, node, f"event has {n_act} activity attributes, expected exactly 1"))
    return SoundnessReport(tuple(violations))
