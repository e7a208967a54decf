"""Role-based visibility for the query path.

A role may be allowed to compute aggregate DFGs without being able to
read a single event, trace or timestamp. When the role also lacks the
``Attribute.concept_name`` property grant, activity names in the result
are replaced by pseudonyms derived from the store's dictionary ids, so
they are stable for a given store.

Policy file grammar (``#`` starts a comment)::

    role analyst
        aggregate-dfg
        read-prop Attribute.concept_name
        traverse EventEvent
        read Attribute

The built-in role ``admin`` holds every grant and cannot be redefined.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .dfg.matrix import DfgFilter, DfgMatrix
from .dfg.scan import dfg_scan
from .errors import AccessDenied, PolicyError, UnknownRole
from .graph import ACTIVITY_KEY, CASE_NAME_KEY, LOG_NAME_KEY, NodeKind, RelationKind

ADMIN = "admin"

KNOWN_PROPERTIES = {
    NodeKind.LOG: {LOG_NAME_KEY},
    NodeKind.TRACE: {CASE_NAME_KEY},
    NodeKind.EVENT: {"timestamp", "ordinal"},
    NodeKind.ATTRIBUTE: None,  # any attribute key, plus "key" and "val"
}


@dataclass(frozen=True)
class Read:
    kind: NodeKind


@dataclass(frozen=True)
class ReadProperty:
    kind: NodeKind
    prop: str


@dataclass(frozen=True)
class Traverse:
    relation: RelationKind


@dataclass(frozen=True)
class AggregateDfg:
    pass


Request = Union[Read, ReadProperty, Traverse, AggregateDfg]


@dataclass(frozen=True)
class Decision:
    allowed: bool
    reason: str = ""

    def __bool__(self):
        return self.allowed


ALLOW = Decision(True)


def deny(reason: str) -> Decision:
    return Decision(False, reason)


@dataclass(frozen=True)
class RoleGrant:
    readable_node_kinds: frozenset = frozenset()
    readable_properties: frozenset = frozenset()
    traversable_relations: frozenset = frozenset()
    aggregate_dfg: bool = False
    superuser: bool = False

    @classmethod
    def everything(cls) -> "RoleGrant":
        return cls(frozenset(NodeKind), frozenset(), frozenset(RelationKind), True, True)


@dataclass(frozen=True)
class AccessPolicy:
    roles: dict = field(default_factory=lambda: {ADMIN: RoleGrant.everything()})

    def grant(self, role: str) -> RoleGrant:
        try:
            return self.roles[role]
        except KeyError:
            raise UnknownRole(f"role {role!r} is not defined in the policy") from None


def authorize(policy: AccessPolicy, role: str, request: Request) -> Decision:
    g = policy.grant(role)
    if g.superuser:
        return ALLOW
    if isinstance(request, Read):
        if request.kind in g.readable_node_kinds:
            return ALLOW
        return deny(f"{request.kind.value.lower()} reads not granted")
    if isinstance(request, ReadProperty):
        if request.kind in g.readable_node_kinds or (request.kind, request.prop) in g.readable_properties:
            return ALLOW
        return deny(f"{request.kind.value.lower()} reads not granted")
    if isinstance(request, Traverse):
        if request.relation in g.traversable_relations:
            return ALLOW
        return deny(f"traversal of {request.relation.value} not granted")
    if isinstance(request, AggregateDfg):
        return ALLOW if g.aggregate_dfg else deny("aggregate-dfg not granted")
    raise TypeError(f"not an access request: {request!r}")


def _node_kind(text: str, line: int) -> NodeKind:
    for k in NodeKind:
        if k.value.lower() == text.lower():
            return k
    raise PolicyError(f"unknown node kind {text!r}", line)


def _relation_kind(text: str, line: int) -> RelationKind:
    for k in RelationKind:
        if k.value.lower() == text.lower():
            return k
    raise PolicyError(f"unknown relation {text!r}", line)


def load_policy(source: Union[bytes, str, io.IOBase]) -> AccessPolicy:
    """Parse a policy document from bytes, text or a binary/text stream."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    roles: dict[str, dict] = {}
    current = None
    for lineno, raw in enumerate(source.splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        directive, _, arg = text.partition(" ")
        arg = arg.strip()
        if directive == "role":
            if not arg or " " in arg:
                raise PolicyError("role needs exactly one name", lineno)
            if arg == ADMIN or arg in roles:
                raise PolicyError(f"duplicate role {arg!r}", lineno)
            current = roles[arg] = {"kinds": set(), "props": set(), "rels": set(), "agg": False}
            continue
        if current is None:
            raise PolicyError(f"grant {directive!r} outside of a role block", lineno)
        if directive == "read":
            current["kinds"].add(_node_kind(arg, lineno))
        elif directive == "read-prop":
            kind_text, dot, prop = arg.partition(".")
            if not dot or not prop:
                raise PolicyError(f"expected <NodeKind>.<property>, got {arg!r}", lineno)
            kind = _node_kind(kind_text, lineno)
            known = KNOWN_PROPERTIES[kind]
            if known is not None and prop not in known:
                raise PolicyError(f"{kind.value} has no property {prop!r}", lineno)
            current["props"].add((kind, prop))
        elif directive == "traverse":
            current["rels"].add(_relation_kind(arg, lineno))
        elif directive == "aggregate-dfg":
            if arg:
                raise PolicyError("aggregate-dfg takes no argument", lineno)
            current["agg"] = True
        else:
            raise PolicyError(f"unknown directive {directive!r}", lineno)
    out = {ADMIN: RoleGrant.everything()}
    for name, g in roles.items():
        out[name] = RoleGrant(frozenset(g["kinds"]), frozenset(g["props"]), frozenset(g["rels"]), g["agg"])
    return AccessPolicy(out)


def load_policy_file(path) -> AccessPolicy:
    return load_policy(Path(path).read_bytes())


def pseudonym(activity_id: int) -> str:
    return f"act_{activity_id + 1:03d}"


def can_see_activity_names(policy: AccessPolicy, role: str) -> bool:
    return bool(authorize(policy, role, ReadProperty(NodeKind.ATTRIBUTE, ACTIVITY_KEY)))


def dfg_scan_as(store, filt, policy: AccessPolicy, role: str, **kwargs):
    """``dfg_scan`` behind the access gateway.

    Raises AccessDenied unless the role holds ``aggregate-dfg``. For roles
    without the activity-name grant, the allowlist in ``filt`` is read as
    pseudonyms and the result is returned pseudonymized.
    """
    decision = authorize(policy, role, AggregateDfg())
    if not decision:
        raise AccessDenied(decision.reason)
    filt = filt or DfgFilter()
    if can_see_activity_names(policy, role):
        return dfg_scan(store, filt, **kwargs)
    names = store.activities
    alias = {n: pseudonym(i) for i, n in enumerate(names)}
    if filt.activities:
        real = {n for n in names if alias[n] in filt.activities}
        if not real:
            return DfgMatrix(())
        filt = DfgFilter(filt.window, frozenset(real))
    return dfg_scan(store, filt, **kwargs).relabel(alias)
