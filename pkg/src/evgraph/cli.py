"""``evgraph`` command line.

Exit codes: 0 success, 1 data violation or parse error, 2 store/system
error, 64 usage error, 77 access denied. Data goes to standard output
(or ``--out``), diagnostics to standard error.
"""

from __future__ import annotations

import argparse
import io
import logging
import os
import sys
from pathlib import Path

from . import errors
from .access import AccessPolicy, dfg_scan_as, load_policy_file
from .bench import run_bench
from .dfg.export import ExportFormat, export_dfg
from .dfg.matrix import DfgFilter
from .graph import EventRepository, validate_soundness
from .ingest import ColumnMapping, default_log_name, export_csv, ingest, read_log
from .storage import GraphStore, MemoryBudget
from .synth import SyntheticSpec, write_log
from .timeutil import TimeWindow, parse_duration, parse_instant

EX_OK, EX_DATA, EX_STORE, EX_USAGE, EX_NOPERM = 0, 1, 2, 64, 77

log = logging.getLogger("evgraph")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _budget(args) -> MemoryBudget:
    if args.memory_limit <= 0:
        raise UsageError("--memory-limit must be positive")
    return MemoryBudget.mebibytes(args.memory_limit)


def _mapping(args) -> ColumnMapping:
    try:
        return ColumnMapping(args.case_column, args.activity_column, args.timestamp_column, args.timestamp_format)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _format_of(args) -> str:
    if args.format:
        return args.format
    suffix = Path(args.input).suffix.lower()
    if suffix in (".xes", ".csv"):
        return suffix[1:]
    raise UsageError("cannot infer --format from the input file name; pass --format xes|csv")


def _instant(text, flag):
    if text is None:
        return None
    try:
        return parse_instant(text)
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def _emit(args, data: bytes):
    if getattr(args, "out", None):
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def cmd_ingest(args) -> int:
    fmt = _format_of(args)
    mapping = _mapping(args)
    name = args.log_name or default_log_name(args.input)
    with GraphStore.open(args.store, _budget(args)) as store:
        try:
            stats = ingest(read_log(args.input, fmt, mapping), store, name)
        except (errors.ParseError, errors.MissingField, errors.MissingColumn) as exc:
            line = getattr(exc, "line", None)
            where = f"{args.input}:{line}" if line is not None else args.input
            print(f"{where}: {exc}", file=sys.stderr)
            return EX_DATA
    _emit(args, ("\n".join(stats.as_lines()) + "\n").encode())
    return EX_OK


def cmd_validate(args) -> int:
    if bool(args.store) == bool(args.input):
        raise UsageError("pass exactly one of --store or --input")
    problems = []
    if args.store:
        with GraphStore.open(args.store, create=False) as store:
            repo = store.load_repository()
            problems = store.verify()
    else:
        repo = EventRepository()
        fmt = _format_of(args)
        try:
            log_node = repo.add_log(default_log_name(args.input))
            for rec in read_log(args.input, fmt, _mapping(args)):
                trace = repo.add_trace(log_node, rec.case_name)
                for activity, ts in rec.events:
                    repo.append_event(trace, activity, ts)
        except (errors.ParseError, errors.MissingField, errors.MissingColumn, errors.DuplicateCase) as exc:
            print(f"{args.input}: {exc}", file=sys.stderr)
            return EX_DATA
    report = validate_soundness(repo)
    lines = [f"rule {v.rule} node {v.node}: {v.description}" for v in report.violations]
    lines += [f"store: {p}" for p in problems]
    _emit(args, ("\n".join(lines or ["sound"]) + "\n").encode())
    return EX_OK if not lines else EX_DATA


def cmd_dfg(args) -> int:
    window = TimeWindow(_instant(args.from_, "--from"), _instant(args.to, "--to"))
    acts = frozenset(a.strip() for a in args.activities.split(",") if a.strip()) if args.activities else None
    filt = DfgFilter(window, acts)
    with GraphStore.open(args.store, _budget(args), create=False) as store:
        if args.role:
            policy = load_policy_file(args.policy) if args.policy else AccessPolicy()
            m = dfg_scan_as(store, filt, policy, args.role, threads=args.threads)
        else:
            from .dfg.scan import dfg_scan
            m = dfg_scan(store, filt, threads=args.threads)
    _emit(args, export_dfg(m, ExportFormat(args.format)))
    return EX_OK


def cmd_bench(args) -> int:
    try:
        step = parse_duration(args.window_step)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.repeat < 1:
        raise UsageError("--repeat must be at least 1")
    with GraphStore.open(args.store, _budget(args), create=False) as store:
        report = run_bench(store, step, args.repeat, threads=args.threads, max_windows=args.max_windows)
    buf = io.StringIO()
    report.to_csv(buf)
    _emit(args, buf.getvalue().encode())
    return EX_OK


def cmd_generate(args) -> int:
    try:
        spec = SyntheticSpec(
            traces=args.traces, min_events=args.min_events, max_events=args.max_events,
            alphabet=args.alphabet, span_ms=parse_duration(args.span), seed=args.seed,
            start_ms=_instant(args.start, "--start"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    buf = io.StringIO()
    write_log(spec, buf, args.format, args.log_name)
    _emit(args, buf.getvalue().encode("utf-8"))
    return EX_OK


def cmd_stats(args) -> int:
    with GraphStore.open(args.store, create=False) as store:
        lines = store.stats().as_lines()
    _emit(args, ("\n".join(lines) + "\n").encode())
    return EX_OK


def cmd_export(args) -> int:
    with GraphStore.open(args.store, create=False) as store:
        buf = io.StringIO()
        export_csv(store, buf, args.log_name)
    _emit(args, buf.getvalue().encode("utf-8"))
    return EX_OK


def _add_mapping_flags(p):
    p.add_argument("--case-column", default="case")
    p.add_argument("--activity-column", default="activity")
    p.add_argument("--timestamp-column", default="timestamp")
    p.add_argument("--timestamp-format", default="iso",
                   help="iso, epoch_ms, epoch_s or a strptime pattern")


def _add_budget_flags(p):
    p.add_argument("--memory-limit", type=float, default=256.0, metavar="MiB")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evgraph", description="Event-log graph store and DFG engine.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load an XES or CSV log into a store")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["xes", "csv"])
    p.add_argument("--store", required=True)
    p.add_argument("--log-name")
    p.add_argument("--out")
    _add_mapping_flags(p)
    _add_budget_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("validate", help="check soundness of a store or a log file")
    p.add_argument("--store")
    p.add_argument("--input")
    p.add_argument("--format", choices=["xes", "csv"])
    p.add_argument("--out")
    _add_mapping_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("dfg", help="compute and export the directly-follows graph")
    p.add_argument("--store", required=True)
    p.add_argument("--from", dest="from_", metavar="ISO8601")
    p.add_argument("--to", metavar="ISO8601")
    p.add_argument("--format", choices=[f.value for f in ExportFormat], default="matrix")
    p.add_argument("--activities", help="comma-separated allowlist")
    p.add_argument("--role")
    p.add_argument("--policy")
    p.add_argument("--out")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_dfg)

    p = sub.add_parser("bench", help="time DFG over accumulative windows")
    p.add_argument("--store", required=True)
    p.add_argument("--window-step", required=True, help="e.g. 1d, 12h, 30m")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--max-windows", type=int)
    p.add_argument("--out")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("generate", help="write a deterministic synthetic log")
    p.add_argument("--traces", type=int, default=100)
    p.add_argument("--min-events", type=int, default=3)
    p.add_argument("--max-events", type=int, default=10)
    p.add_argument("--alphabet", type=int, default=10)
    p.add_argument("--span", default="30d")
    p.add_argument("--start", default="2020-01-01T00:00:00Z")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--format", choices=["xes", "csv"], default="xes")
    p.add_argument("--log-name", default="synthetic")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("stats", help="print node and relation counts")
    p.add_argument("--store", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export", help="write stored events back out as CSV")
    p.add_argument("--store", required=True)
    p.add_argument("--log-name")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EX_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"evgraph: error: {exc}", file=sys.stderr)
        return EX_USAGE
    except (errors.InvalidWindow, errors.InvalidDicing) as exc:
        print(f"evgraph: error: {exc}", file=sys.stderr)
        return EX_USAGE
    except (errors.AccessDenied, errors.UnknownRole) as exc:
        print(f"evgraph: access denied: {exc}", file=sys.stderr)
        return EX_NOPERM
    except (errors.StoreError, errors.DuplicateLog, OSError) as exc:
        print(f"evgraph: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EX_STORE
    except errors.EvgraphError as exc:
        print(f"evgraph: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EX_DATA


if __name__ == "__main__":
    sys.exit(main())
