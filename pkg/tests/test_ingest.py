import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evgraph import GraphStore
from evgraph.dfg import dfg_scan
from evgraph.errors import DuplicateCase, DuplicateLog, MissingColumn, MissingField, ParseError
from evgraph.graph import NodeKind
from evgraph.ingest import (
    ColumnMapping,
    TraceRecord,
    export_csv,
    ingest,
    parse_csv,
    parse_xes,
    read_log,
    write_csv,
)
from evgraph.synth import SyntheticSpec, generate_records, write_xes
from evgraph.timeutil import format_instant

from conftest import SAMPLE_TRACES, SAMPLE_DFG

SAMPLE_RECORDS = [TraceRecord(t, [(a, ts) for _, a, ts in evs]) for t, evs in SAMPLE_TRACES.items()]


def _xes(body: str) -> bytes:
    return ('<?xml version="1.0" encoding="UTF-8"?>\n'
            '<log xes.version="1849-2016" xmlns="http://www.xes-standard.org/">\n'
            + body + "</log>\n").encode()


def _event(name, when, extra=""):
    return (f'<event><string key="concept:name" value="{name}"/>'
            f'<date key="time:timestamp" value="{when}"/>{extra}</event>\n')


def sample_xes() -> bytes:
    buf = io.StringIO()
    write_xes(SAMPLE_RECORDS, buf, "l1")
    return buf.getvalue().encode()


def sample_csv() -> bytes:
    rows = ["case,activity,timestamp"]
    for rec in SAMPLE_RECORDS:
        rows += [f"{rec.case_name},{a},{format_instant(ts)}" for a, ts in rec.events]
    return ("\n".join(rows) + "\n").encode()


class TestXes:
    def test_minimal(self):
        doc = _xes('<trace><string key="concept:name" value="t1"/>'
                   + _event("a1", "2021-01-01T08:00:00.000+00:00")
                   + _event("a2", "2021-01-01T09:00:00Z") + "</trace>\n")
        (rec,) = parse_xes(io.BytesIO(doc))
        assert rec.case_name == "t1"
        assert [a for a, _ in rec.events] == ["a1", "a2"]
        assert rec.events[1][1] - rec.events[0][1] == 3_600_000

    def test_zero_traces(self):
        assert list(parse_xes(io.BytesIO(_xes("")))) == []

    def test_sample_fixture(self):
        assert list(parse_xes(io.BytesIO(sample_xes()))) == SAMPLE_RECORDS

    def test_ignores_unknown_attributes_and_extensions(self):
        doc = _xes('<extension name="Concept" prefix="concept" uri="http://x"/>'
                   '<global scope="event"><string key="concept:name" value="__INVALID__"/></global>'
                   '<trace><string key="concept:name" value="t"/><int key="cost" value="3"/>'
                   + _event("a", "2021-01-01T00:00:00Z",
                            '<string key="org:resource" value="bob"/>'
                            '<list key="l"><string key="concept:name" value="nested"/></list>')
                   + "</trace>")
        (rec,) = parse_xes(io.BytesIO(doc))
        assert rec.events == [("a", 1609459200000)]

    def test_timezone_offsets(self):
        doc = _xes('<trace><string key="concept:name" value="t"/>'
                   + _event("a", "2021-01-01T01:00:00+01:00") + "</trace>")
        (rec,) = parse_xes(io.BytesIO(doc))
        assert rec.events[0][1] == 1609459200000

    def test_malformed_xml_reports_line(self):
        doc = b'<?xml version="1.0"?>\n<log>\n<trace>\n</log>\n'
        with pytest.raises(ParseError) as info:
            list(parse_xes(io.BytesIO(doc)))
        assert info.value.line == 4

    def test_missing_timestamp(self):
        doc = _xes('<trace><string key="concept:name" value="t7"/>'
                   + _event("a", "2021-01-01T00:00:00Z")
                   + '<event><string key="concept:name" value="b"/></event></trace>')
        with pytest.raises(MissingField) as info:
            list(parse_xes(io.BytesIO(doc)))
        assert (info.value.trace, info.value.index, info.value.field) == ("t7", 1, "time:timestamp")

    def test_missing_activity(self):
        doc = _xes('<trace><string key="concept:name" value="t"/>'
                   '<event><date key="time:timestamp" value="2021-01-01T00:00:00Z"/></event></trace>')
        with pytest.raises(MissingField):
            list(parse_xes(io.BytesIO(doc)))

    def test_bad_date(self):
        doc = _xes('<trace><string key="concept:name" value="t"/>' + _event("a", "yesterday") + "</trace>")
        with pytest.raises(ParseError):
            list(parse_xes(io.BytesIO(doc)))

    def test_out_of_order_events_are_sorted_and_flagged(self):
        doc = _xes('<trace><string key="concept:name" value="t"/>'
                   + _event("late", "2021-01-02T00:00:00Z") + _event("early", "2021-01-01T00:00:00Z")
                   + "</trace>")
        (rec,) = parse_xes(io.BytesIO(doc))
        assert [a for a, _ in rec.events] == ["early", "late"]
        assert rec.reordered

    def test_empty_trace_skipped(self):
        doc = _xes('<trace><string key="concept:name" value="empty"/></trace>'
                   '<trace><string key="concept:name" value="t"/>'
                   + _event("a", "2021-01-01T00:00:00Z") + "</trace>")
        assert [r.case_name for r in parse_xes(io.BytesIO(doc))] == ["t"]


class TestCsv:
    def test_sample(self):
        assert list(parse_csv(io.BytesIO(sample_csv()))) == SAMPLE_RECORDS

    def test_empty_body(self):
        assert list(parse_csv(io.BytesIO(b"case,activity,timestamp\n"))) == []

    def test_no_header_at_all(self):
        assert list(parse_csv(io.BytesIO(b""))) == []

    def test_interleaved_rows_grouped_by_case(self):
        data = b"case,activity,timestamp\nA,x,1\nB,y,2\nA,z,3\n"
        recs = list(parse_csv(io.BytesIO(data), ColumnMapping(timestamp_format="epoch_ms")))
        assert recs == [TraceRecord("A", [("x", 1), ("z", 3)]), TraceRecord("B", [("y", 2)])]

    def test_equal_timestamps_keep_file_order(self):
        data = b"case,activity,timestamp\nA,c,5\nA,a,5\nA,b,5\nA,first,1\n"
        (rec,) = parse_csv(io.BytesIO(data), ColumnMapping(timestamp_format="epoch_ms"))
        assert [a for a, _ in rec.events] == ["first", "c", "a", "b"]
        assert rec.reordered

    def test_custom_columns_and_format(self):
        data = "﻿ts;who;what\n".replace(";", ",").encode() + b"01-02-2021 10:00,c1,go\n"
        mapping = ColumnMapping("who", "what", "ts", "%d-%m-%Y %H:%M")
        (rec,) = parse_csv(io.BytesIO(data), mapping)
        assert rec.events == [("go", 1612173600000)]

    def test_epoch_seconds(self):
        data = b"case,activity,timestamp\nA,x,1.5\n"
        (rec,) = parse_csv(io.BytesIO(data), ColumnMapping(timestamp_format="epoch_s"))
        assert rec.events == [("x", 1500)]

    def test_quoted_fields(self):
        data = b'case,activity,timestamp\n"c,1","say ""hi""",2021-01-01T00:00:00Z\n'
        (rec,) = parse_csv(io.BytesIO(data))
        assert rec.case_name == "c,1" and rec.events[0][0] == 'say "hi"'

    def test_bad_timestamp_reports_row(self):
        data = b"case,activity,timestamp\nA,x,2021-01-01T00:00:00Z\nA,y,not-a-date\n"
        with pytest.raises(ParseError) as info:
            list(parse_csv(io.BytesIO(data)))
        assert info.value.line == 3

    def test_short_row(self):
        with pytest.raises(ParseError):
            list(parse_csv(io.BytesIO(b"case,activity,timestamp\nA,x\n")))

    def test_missing_column(self):
        with pytest.raises(MissingColumn):
            list(parse_csv(io.BytesIO(b"case,activity,time\nA,x,1\n")))

    def test_mapping_columns_distinct(self):
        with pytest.raises(ValueError):
            ColumnMapping("c", "c", "t")


class TestIngest:
    def test_sample_stats(self, tmp_path):
        with GraphStore.open(tmp_path / "s") as store:
            stats = ingest(iter(SAMPLE_RECORDS), store, "l1")
            assert (stats.traces, stats.events, stats.activities) == (2, 6, 4)
            assert dfg_scan(store).counts == SAMPLE_DFG

    def test_empty_iterator_creates_log(self, tmp_path):
        with GraphStore.open(tmp_path / "s") as store:
            stats = ingest(iter(()), store, "empty")
            assert (stats.traces, stats.events, stats.activities) == (0, 0, 0)
            assert store.log_names() == ["empty"]
            assert store.stats().nodes[NodeKind.LOG] == 1

    def test_synthetic_alphabet(self, tmp_path):
        spec = SyntheticSpec(traces=1000, min_events=5, max_events=15, alphabet=12, seed=9)
        with GraphStore.open(tmp_path / "s") as store:
            stats = ingest(generate_records(spec), store, "syn")
        assert stats.traces == 1000
        assert stats.activities == len({a for r in generate_records(spec) for a, _ in r.events}) == 12

    def test_chunking_keeps_one_log(self, tmp_path):
        spec = SyntheticSpec(traces=300, min_events=2, max_events=9, alphabet=6, seed=1)
        records = list(generate_records(spec))
        with GraphStore.open(tmp_path / "a") as one, GraphStore.open(tmp_path / "b") as many:
            ingest(records, one, "syn")
            ingest(records, many, "syn", chunk_events=7)
            assert many.stats() == one.stats()
            assert many.log_names() == ["syn"]
            assert dfg_scan(many) == dfg_scan(one)
            assert list(many.iter_traces()) == list(one.iter_traces())

    def test_order_preserved(self, tmp_path):
        spec = SyntheticSpec(traces=50, min_events=1, max_events=20, alphabet=5, seed=4)
        records = list(generate_records(spec))
        with GraphStore.open(tmp_path / "s") as store:
            ingest(records, store, "syn")
            stored = list(store.iter_traces())
        assert [(c, evs) for _, c, evs in stored] == [(r.case_name, r.events) for r in records]

    def test_every_event_has_one_activity_link(self, tmp_path):
        with GraphStore.open(tmp_path / "s") as store:
            ingest(generate_records(SyntheticSpec(traces=40, seed=2)), store, "syn")
            repo = store.load_repository()
        for e in repo.nodes(NodeKind.EVENT):
            assert sum(repo.kind(a) is NodeKind.ATTRIBUTE for a in repo.successors(e)) == 1

    def test_reordered_counter(self, tmp_path):
        recs = [TraceRecord("a", [("x", 5), ("y", 1)]), TraceRecord("b", [("x", 1), ("y", 2)])]
        with GraphStore.open(tmp_path / "s") as store:
            assert ingest(recs, store, "l").reordered == 1

    def test_duplicate_log(self, tmp_path):
        with GraphStore.open(tmp_path / "s") as store:
            ingest(iter(SAMPLE_RECORDS), store, "l1")
            with pytest.raises(DuplicateLog):
                ingest(iter(SAMPLE_RECORDS), store, "l1")
            assert store.stats().nodes[NodeKind.EVENT] == 6

    def test_duplicate_case_rolls_back(self, tmp_path):
        recs = [TraceRecord(f"c{i}", [("x", i)]) for i in range(20)] + [TraceRecord("c3", [("y", 0)])]
        with GraphStore.open(tmp_path / "s") as store:
            with pytest.raises(DuplicateCase):
                ingest(recs, store, "l", chunk_events=5)
            assert sum(store.stats().nodes.values()) == 0
            assert store.log_names() == []
            ingest(recs[:-1], store, "l")
            assert store.stats().nodes[NodeKind.TRACE] == 20

    def test_parse_error_mid_stream_rolls_back(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_bytes(b"case,activity,timestamp\nA,x,1\nB,y,oops\n")
        with GraphStore.open(tmp_path / "s") as store:
            with pytest.raises(ParseError):
                ingest(read_log(path, "csv", ColumnMapping(timestamp_format="epoch_ms")), store, "l")
            assert store.log_names() == []

    def test_xes_csv_round_trip(self, tmp_path):
        spec = SyntheticSpec(traces=200, min_events=1, max_events=12, alphabet=8, seed=13)
        xes = tmp_path / "log.xes"
        with open(xes, "w", encoding="utf-8") as f:
            write_xes(generate_records(spec), f)
        with GraphStore.open(tmp_path / "a") as a:
            ingest(read_log(xes, "xes"), a, "syn")
            buf = io.StringIO()
            export_csv(a, buf)
            csv_path = tmp_path / "log.csv"
            csv_path.write_text(buf.getvalue(), encoding="utf-8")
            with GraphStore.open(tmp_path / "b") as b:
                ingest(read_log(csv_path, "csv"), b, "syn")
                assert dfg_scan(b) == dfg_scan(a)
                assert list(b.iter_traces()) == list(a.iter_traces())


names = st.text(st.characters(blacklist_categories=("Cs", "Cc")), min_size=1, max_size=8)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(names, st.lists(st.tuples(names, st.integers(0, 10**12)), min_size=1, max_size=6)),
                max_size=6, unique_by=lambda t: t[0]))
def test_csv_write_parse_round_trip(traces):
    records = [TraceRecord(c, sorted(evs, key=lambda e: e[1])) for c, evs in traces]
    buf = io.StringIO()
    write_csv(records, buf)
    assert list(parse_csv(io.BytesIO(buf.getvalue().encode()))) == records


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(names, st.lists(st.tuples(names, st.integers(0, 10**12)), min_size=1, max_size=6)),
                max_size=6, unique_by=lambda t: t[0]))
def test_xes_write_parse_round_trip(traces):
    records = [TraceRecord(c, sorted(evs, key=lambda e: e[1])) for c, evs in traces]
    buf = io.StringIO()
    write_xes(records, buf)
    assert list(parse_xes(io.BytesIO(buf.getvalue().encode()))) == records
