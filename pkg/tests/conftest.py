import random
from collections import Counter

import pytest

from evgraph import EventRepository, GraphStore, MemoryBudget
from evgraph.timeutil import parse_instant

HOUR = 3_600_000
T0 = parse_instant("2021-01-01T08:00:00Z")
DAY2 = parse_instant("2021-01-02T08:00:00Z")

# the sample repository: two traces, a1 a2 a3 then a2 a3 a4
SAMPLE_TRACES = {
    "t1": [("e1", "a1", T0), ("e2", "a2", T0 + HOUR), ("e3", "a3", T0 + 2 * HOUR)],
    "t2": [("e4", "a2", DAY2), ("e5", "a3", DAY2 + HOUR), ("e6", "a4", DAY2 + 2 * HOUR)],
}

# relation set of the sample, written out edge by edge by hand
SAMPLE_RELATIONS = {
    ("l1", "t1"), ("t1", "e1"), ("t1", "e2"), ("t1", "e3"), ("e1", "e2"), ("e2", "e3"),
    ("l1", "t2"), ("t2", "e4"), ("t2", "e5"), ("t2", "e6"), ("e4", "e5"), ("e5", "e6"),
    ("e1", "a1"), ("e2", "a2"), ("e3", "a3"), ("e4", "a2"), ("e5", "a3"), ("e6", "a4"),
}

SAMPLE_DFG = {("a1", "a2"): 1, ("a2", "a3"): 2, ("a3", "a4"): 1}


class Sample:
    def __init__(self):
        self.repo = EventRepository()
        self.ids = {}
        self.ids["l1"] = self.repo.add_log("l1")
        for t, events in SAMPLE_TRACES.items():
            self.ids[t] = self.repo.add_trace(self.ids["l1"], t)
            for e, a, ts in events:
                self.ids[e] = self.repo.append_event(self.ids[t], a, ts)
                self.ids.setdefault(a, self.repo.attribute("concept_name", a))
        self.names = {v: k for k, v in self.ids.items()}

    def __getitem__(self, name):
        return self.ids[name]

    def named(self, nodes):
        return {self.names[n] for n in nodes}


@pytest.fixture
def sample():
    return Sample()


@pytest.fixture
def sample_store(tmp_path, sample):
    store = GraphStore.open(tmp_path / "sample", MemoryBudget.mebibytes(64))
    store.persist(sample.repo)
    yield store
    store.close()


def random_repository(rng: random.Random, max_activities=50, max_traces=500, max_events=5000):
    """A random sound repository built through the public API, plus its trace list."""
    n_act = rng.randint(1, max_activities)
    n_traces = rng.randint(1, max_traces)
    budget = rng.randint(n_traces, max(n_traces, max_events))
    lengths = [1] * n_traces
    for _ in range(budget - n_traces):
        lengths[rng.randrange(n_traces)] += 1
    repo = EventRepository()
    log = repo.add_log("rand")
    traces = []
    for i, n in enumerate(lengths):
        t = repo.add_trace(log, f"c{i}")
        ts = rng.randint(0, 10**9)
        events = []
        for _ in range(n):
            a = f"act{rng.randrange(n_act)}"
            repo.append_event(t, a, ts)
            events.append((a, ts))
            ts += rng.choice([0, 1, 1000, 60_000])
        traces.append(events)
    return repo, traces


def pair_counts(traces, lo=None, hi=None):
    """Count consecutive activity pairs per trace, keeping pairs whose two instants lie in [lo, hi]."""
    c = Counter()
    for events in traces:
        for (a, ta), (b, tb) in zip(events, events[1:]):
            if lo is not None and (ta < lo or tb < lo):
                continue
            if hi is not None and (ta > hi or tb > hi):
                continue
            c[(a, b)] += 1
    return dict(c)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
