"""Streaming reader for the subset of XES that matters here.

Only ``<trace>`` and ``<event>`` elements and their direct ``<string>``
and ``<date>`` children are read: ``concept:name`` on a trace is the case
name, on an event the activity; ``time:timestamp`` is the event instant.
Extensions, globals, classifiers, nested and other-typed attributes are
skipped.
"""

from __future__ import annotations

import logging
from typing import BinaryIO, Iterator
from xml.parsers import expat

from ..errors import MissingField, ParseError
from ..timeutil import parse_instant
from .records import TraceRecord

log = logging.getLogger(__name__)

NAME_KEY = "concept:name"
TIME_KEY = "time:timestamp"
_CHUNK = 1 << 16


def _local(tag: str) -> str:
    return tag.rsplit(":", 1)[-1]


class _Handler:
    def __init__(self, parser):
        self.parser = parser
        self.stack: list[str] = []
        self.done: list[TraceRecord] = []
        self.trace_index = -1
        self.case = None
        self.events = []
        self.ev_name = None
        self.ev_time = None

    def start(self, tag, attrs):
        tag = _local(tag)
        parent = self.stack[-1] if self.stack else None
        self.stack.append(tag)
        if tag == "trace" and parent == "log":
            self.trace_index += 1
            self.case = None
            self.events = []
        elif tag == "event" and parent == "trace":
            self.ev_name = self.ev_time = None
        elif parent == "trace" and tag == "string" and attrs.get("key") == NAME_KEY:
            self.case = attrs.get("value")
        elif parent == "event" and len(self.stack) >= 3 and self.stack[-3] == "trace":
            key = attrs.get("key")
            if tag == "string" and key == NAME_KEY:
                self.ev_name = attrs.get("value")
            elif tag == "date" and key == TIME_KEY:
                value = attrs.get("value", "")
                try:
                    self.ev_time = parse_instant(value)
                except ValueError:
                    raise ParseError(f"bad time:timestamp {value!r}", self.parser.CurrentLineNumber) from None

    def end(self, tag):
        tag = _local(tag)
        self.stack.pop()
        parent = self.stack[-1] if self.stack else None
        if tag == "event" and parent == "trace":
            where = self.case if self.case is not None else f"#{self.trace_index}"
            if not self.ev_name:
                raise MissingField(where, len(self.events), NAME_KEY)
            if self.ev_time is None:
                raise MissingField(where, len(self.events), TIME_KEY)
            self.events.append((self.ev_name, self.ev_time))
        elif tag == "trace" and parent == "log":
            if not self.case:
                raise MissingField(f"#{self.trace_index}", None, NAME_KEY)
            if not self.events:
                log.warning("skipping trace %r: no events", self.case)
                return
            self.done.append(TraceRecord(self.case, self.events).normalized())


def parse_xes(stream: BinaryIO) -> Iterator[TraceRecord]:
    """Yield one TraceRecord per ``<trace>`` of an XES document (UTF-8)."""
    parser = expat.ParserCreate("UTF-8")
    handler = _Handler(parser)
    parser.StartElementHandler = handler.start
    parser.EndElementHandler = handler.end
    parser.buffer_text = True
    while True:
        chunk = stream.read(_CHUNK)
        try:
            parser.Parse(chunk, not chunk)
        except expat.ExpatError as exc:
            raise ParseError(expat.errors.messages[exc.code], exc.lineno) from None
        if handler.done:
            yield from handler.done
            handler.done = []
        if not chunk:
            return
