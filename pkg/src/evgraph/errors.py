"""Exception hierarchy shared by every evgraph module."""


class EvgraphError(Exception):
    """Base class for all errors raised by evgraph."""


# graph-core

class GraphError(EvgraphError):
    pass


class NonemptyRequired(GraphError, ValueError):
    pass


class DuplicateLog(GraphError):
    pass


class DuplicateCase(GraphError):
    pass


class UnknownNode(GraphError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class KindMismatch(GraphError, TypeError):
    pass


class TimestampRegression(GraphError, ValueError):
    pass


class SoundnessRequired(GraphError):
    def __init__(self, report):
        self.report = report
        first = report.violations[0] if report.violations else None
        detail = f": rule {first.rule} at node {first.node} ({first.description})" if first else ""
        super().__init__(f"repository is not sound{detail}")


# storage

class StoreError(EvgraphError):
    pass


class CorruptStore(StoreError):
    pass


class VersionMismatch(StoreError):
    pass


class StoreLocked(StoreError):
    pass


class MemoryBudgetExceeded(StoreError):
    pass


# ingestion

class IngestError(EvgraphError):
    pass


class ParseError(IngestError):
    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class MissingField(IngestError):
    def __init__(self, trace, index, field):
        self.trace = trace
        self.index = index
        self.field = field
        super().__init__(f"trace {trace!r} event {index}: missing {field}")


class MissingColumn(IngestError):
    pass


# dfg-engine

class InvalidWindow(EvgraphError, ValueError):
    pass


class InvalidDicing(EvgraphError, ValueError):
    pass


# access-control

class PolicyError(EvgraphError):
    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class UnknownRole(EvgraphError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class AccessDenied(EvgraphError):
    def __init__(self, reason):
        self.reason = reason
        super().__init__(reason)
