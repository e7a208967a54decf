import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evgraph.errors import (
    DuplicateLog,
    KindMismatch,
    NonemptyRequired,
    TimestampRegression,
    UnknownNode,
)
from evgraph.graph import (
    RELATION_ENDPOINTS,
    AttributeData,
    EventData,
    EventRepository,
    NodeKind,
    RelationKind,
    TraceData,
    validate_soundness,
)

from conftest import SAMPLE_RELATIONS


class TestConstruction:
    def test_add_log(self):
        repo = EventRepository()
        log = repo.add_log("l1")
        assert repo.kind(log) is NodeKind.LOG
        assert repo.data(log).properties == {"log_concept_name": "l1"}

    def test_empty_log_name_rejected(self):
        with pytest.raises(NonemptyRequired):
            EventRepository().add_log("")

    def test_duplicate_log(self):
        repo = EventRepository()
        repo.add_log("l1")
        with pytest.raises(DuplicateLog):
            repo.add_log("l1")

    def test_add_trace_links_to_log(self, sample):
        assert sample.repo.predecessors(sample["t1"]) == {sample["l1"]}
        assert len(sample.repo.predecessors(sample["t2"])) == 1
        assert sample.repo.data(sample["t1"]).properties == {"case_concept_name": "t1"}

    def test_add_trace_kind_mismatch(self, sample):
        with pytest.raises(KindMismatch):
            sample.repo.add_trace(sample["e1"], "t")

    def test_add_trace_unknown_log(self):
        with pytest.raises(UnknownNode):
            EventRepository().add_trace(42, "t")

    def test_append_event_chain(self, sample):
        repo = sample.repo
        assert sample.named(repo.successors(sample["e1"])) == {"e2", "a1"}
        assert repo.trace_events(sample["t1"]) == [sample["e1"], sample["e2"], sample["e3"]]
        assert [repo.data(e).ordinal for e in repo.trace_events(sample["t2"])] == [0, 1, 2]

    def test_chain_head_has_no_event_predecessor(self):
        repo = EventRepository()
        t = repo.add_trace(repo.add_log("l"), "c")
        e = repo.append_event(t, "a", 0)
        assert repo.predecessors(e) == {t}

    def test_timestamp_regression(self, sample):
        with pytest.raises(TimestampRegression):
            sample.repo.append_event(sample["t1"], "a9", 0)

    def test_equal_timestamps_allowed(self):
        repo = EventRepository()
        t = repo.add_trace(repo.add_log("l"), "c")
        a = repo.append_event(t, "x", 5)
        b = repo.append_event(t, "y", 5)
        assert repo.trace_events(t) == [a, b]

    def test_append_to_unknown_trace(self):
        with pytest.raises(UnknownNode):
            EventRepository().append_event(7, "a", 0)


class TestBulletOperators:
    def test_pred_of_shared_attribute(self, sample):
        assert sample.named(sample.repo.predecessors(sample["a2"])) == {"e2", "e4"}

    def test_pred_of_log_is_empty(self, sample):
        assert sample.repo.predecessors(sample["l1"]) == frozenset()

    def test_pred_and_succ_match_sample(self, sample):
        # every node's neighbourhoods agree with the hand-listed relation set
        for name, node in sample.ids.items():
            expected_in = {s for s, d in SAMPLE_RELATIONS if d == name}
            expected_out = {d for s, d in SAMPLE_RELATIONS if s == name}
            assert sample.named(sample.repo.predecessors(node)) == expected_in, name
            assert sample.named(sample.repo.successors(node)) == expected_out, name

    def test_examples(self, sample):
        assert sample.named(sample.repo.predecessors(sample["e2"])) == {"t1", "e1"}
        assert sample.named(sample.repo.successors(sample["e2"])) == {"e3", "a2"}
        assert sample.repo.successors(sample["a4"]) == frozenset()
        assert sample.named(sample.repo.successors(sample["t1"])) == {"e1", "e2", "e3"}

    def test_unknown_node(self, sample):
        with pytest.raises(UnknownNode):
            sample.repo.predecessors(10_000)
        with pytest.raises(UnknownNode):
            sample.repo.successors(10_000)

    def test_relation_set(self, sample):
        got = {(sample.names[r.src], sample.names[r.dst]) for r in sample.repo.relations()}
        assert got == SAMPLE_RELATIONS
        assert sample.repo.relation_count == len(SAMPLE_RELATIONS)


def _bare_event(repo, trace=None, ts=0, activity="a"):
    e = repo._insert_node(repo._fresh_id(), EventData(ts, 0))
    if trace is not None:
        repo._insert_relation(trace, e)
    if activity is not None:
        attr = repo.attribute("concept_name", activity)
        if attr is None:
            attr = repo._insert_node(repo._fresh_id(), AttributeData("concept_name", activity))
        repo._insert_relation(e, attr)
    return e


class TestSoundness:
    def test_fixture_is_sound(self, sample):
        report = validate_soundness(sample.repo)
        assert report.is_sound
        assert report.violations == ()

    def test_empty_repository_is_sound(self):
        assert validate_soundness(EventRepository()).is_sound

    def test_rule1_trace_without_log(self):
        repo = EventRepository()
        t = repo._insert_node(repo._fresh_id(), TraceData("orphan"))
        report = validate_soundness(repo)
        assert [(v.rule, v.node) for v in report.violations] == [(1, t)]

    def test_rule1_trace_with_two_logs(self):
        repo = EventRepository()
        l1, l2 = repo.add_log("l1"), repo.add_log("l2")
        t = repo.add_trace(l1, "c")
        repo._insert_relation(l2, t)
        assert [(v.rule, v.node) for v in validate_soundness(repo).violations] == [(1, t)]

    def test_rule2_event_without_trace(self):
        repo = EventRepository()
        e = _bare_event(repo)
        assert [(v.rule, v.node) for v in validate_soundness(repo).violations] == [(2, e)]

    def test_rule3_two_incoming_flows(self):
        repo = EventRepository()
        t = repo.add_trace(repo.add_log("l"), "c")
        a = repo.append_event(t, "x", 0)
        b = _bare_event(repo, t)
        c = _bare_event(repo, t)
        repo._insert_relation(a, c)
        repo._insert_relation(b, c)
        assert [(v.rule, v.node) for v in validate_soundness(repo).violations] == [(3, c)]

    def test_rule4_two_outgoing_flows(self):
        repo = EventRepository()
        t = repo.add_trace(repo.add_log("l"), "c")
        a = repo.append_event(t, "x", 0)
        b = _bare_event(repo, t)
        c = _bare_event(repo, t)
        repo._insert_relation(a, b)
        repo._insert_relation(a, c)
        assert [(v.rule, v.node) for v in validate_soundness(repo).violations] == [(4, a)]

    def test_rule5_missing_activity(self):
        repo = EventRepository()
        t = repo.add_trace(repo.add_log("l"), "c")
        e = _bare_event(repo, t, activity=None)
        assert [(v.rule, v.node) for v in validate_soundness(repo).violations] == [(5, e)]

    def test_rule5_two_activities(self):
        repo = EventRepository()
        t = repo.add_trace(repo.add_log("l"), "c")
        e = repo.append_event(t, "x", 0)
        other = repo._insert_node(repo._fresh_id(), AttributeData("concept_name", "y"))
        repo._insert_relation(e, other)
        assert validate_soundness(repo).rules() == {5}

    def test_rule5_ignores_other_attribute_keys(self):
        repo = EventRepository()
        t = repo.add_trace(repo.add_log("l"), "c")
        e = repo.append_event(t, "x", 0)
        res = repo._insert_node(repo._fresh_id(), AttributeData("org_resource", "bob"))
        repo._insert_relation(e, res)
        assert validate_soundness(repo).is_sound

    def test_every_violation_listed(self):
        repo = EventRepository()
        repo._insert_node(repo._fresh_id(), TraceData("a"))
        repo._insert_node(repo._fresh_id(), TraceData("b"))
        _bare_event(repo, activity=None)
        assert sorted(v.rule for v in validate_soundness(repo).violations) == [1, 1, 2, 5]

    def test_illegal_relation_kind(self, sample):
        with pytest.raises(KindMismatch):
            sample.repo._insert_relation(sample["a1"], sample["e1"])
        with pytest.raises(KindMismatch):
            sample.repo._insert_relation(sample["l1"], sample["e1"])


construction = st.lists(
    st.tuples(
        st.integers(0, 4),  # trace slot
        st.sampled_from(["a", "b", "c", "d", "e", "f"]),
        st.integers(0, 3),  # time step
    ),
    max_size=60,
)


def _build(ops, n_logs=2):
    repo = EventRepository()
    logs = [repo.add_log(f"log{i}") for i in range(n_logs)]
    traces, clock = {}, {}
    for slot, activity, step in ops:
        if slot not in traces:
            traces[slot] = repo.add_trace(logs[slot % n_logs], f"case{slot}")
            clock[slot] = 0
        clock[slot] += step
        repo.append_event(traces[slot], activity, clock[slot])
    return repo


@settings(max_examples=150, deadline=None)
@given(construction)
def test_construction_implies_soundness(ops):
    assert validate_soundness(_build(ops)).is_sound


@settings(max_examples=100, deadline=None)
@given(construction)
def test_bullet_duality(ops):
    repo = _build(ops)
    for m in repo.nodes():
        for n in repo.successors(m):
            assert m in repo.predecessors(n)
        for n in repo.predecessors(m):
            assert m in repo.successors(n)


@settings(max_examples=100, deadline=None)
@given(construction)
def test_relation_kind_closure(ops):
    repo = _build(ops)
    for src, dst, kind in repo.relations():
        assert (repo.kind(src), repo.kind(dst)) == RELATION_ENDPOINTS[kind]
    assert {r.kind for r in repo.relations()} <= set(RelationKind)


@settings(max_examples=100, deadline=None)
@given(construction)
def test_attribute_dedup(ops):
    repo = _build(ops)
    target = {}
    for e in repo.nodes(NodeKind.EVENT):
        (attr,) = [a for a in repo.successors(e) if repo.kind(a) is NodeKind.ATTRIBUTE]
        name = repo.data(attr).val
        assert target.setdefault(name, attr) == attr
    assert len(repo.activity_attributes()) == len(target)
