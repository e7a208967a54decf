"""Pairwise DFG over an in-memory repository, used as the reference oracle."""

from __future__ import annotations

from ..errors import SoundnessRequired
from ..graph import EventRepository, NodeKind, validate_soundness
from .matrix import DfgMatrix


def dfg_naive(repo: EventRepository) -> DfgMatrix:
    """For every ordered pair of activity attributes (a, b), count the
    event-to-event relations from an event of a to an event of b.

    The inner sum over e in pred(a), e' in pred(b) of [(e, e') in R] is
    evaluated as |succ(e) & pred(b)| per e, which is the same sum.
    """
    report = validate_soundness(repo)
    if not report.is_sound:
        raise SoundnessRequired(report)
    attrs = repo.activity_attributes()
    name = {a: repo.data(a).val for a in attrs}
    events_of = {a: {e for e in repo.predecessors(a) if repo.kind(e) is NodeKind.EVENT} for a in attrs}
    succ = {e: repo.successors(e) for evs in events_of.values() for e in evs}
    counts = {}
    for a in attrs:
        for b in attrs:
            pre_b = events_of[b]
            c = sum(len(succ[e] & pre_b) for e in events_of[a])
            if c:
                counts[(name[a], name[b])] = c
    return DfgMatrix(tuple(name.values()), counts)
