"""Command-line interface.

    qqgra extract --input q.jsonl [--config gra.conf] [--format csv|json|table] [--out FILE]
    qqgra analyze --input q.jsonl [--traffic t.csv] [--config gra.conf] [--format md]
                  [--out FILE] [--plot FILE] [--workers N]
    qqgra synth   [--config spec.conf] [--seed N] [--out q.jsonl] [--traffic t.csv]
    qqgra report  --input report.json [--format table|csv|json] [--out FILE] [--plot FILE]

Exit status: 0 on success, 1 on usage errors, 2 on data errors. Data errors
are printed as ``[stage] ErrorType: message`` on standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace
from typing import Sequence

from . import __version__
from .config import load_config
from .errors import QqgraError, WriteFailure
from .features import FEATURE_NAMES, FeatureVector
from .pipeline import extract_all, run_pipeline, run_stage
from .records import load_records, write_records, write_traffic
from .report import OutputFormat, emit_plot_data, load_report, render_report
from .synth import gen_corpus, gen_traffic, load_spec

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit status 1."""

    def error(self, message):
        self.print_help(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _format(value: str) -> OutputFormat:
    try:
        return OutputFormat.parse(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown format {value!r} (choose table, md, csv or json)") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qqgra", description="Question-quality features and grey relational analysis.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="{extract,analyze,synth,report}", parser_class=_Parser)

    ex = sub.add_parser("extract", help="per-question feature table")
    ex.add_argument("--input", required=True, help="question records (one JSON object per line)")
    ex.add_argument("--config", help="pipeline config file")
    ex.add_argument("--format", type=_format, default=OutputFormat.CSV)
    ex.add_argument("--out", help="output file (default: standard output)")

    an = sub.add_parser("analyze", help="rank features and groups against pageviews")
    an.add_argument("--input", required=True, help="question records (one JSON object per line)")
    an.add_argument("--traffic", help="platform traffic CSV (month,visits) for the control series")
    an.add_argument("--config", help="pipeline config file")
    an.add_argument("--format", type=_format, default=OutputFormat.TABLE)
    an.add_argument("--out", help="output file (default: standard output)")
    an.add_argument("--plot", help="also write feature,grade bar-chart data here")
    an.add_argument("--workers", type=int, help="extraction processes (overrides the config)")

    sy = sub.add_parser("synth", help="generate a synthetic corpus")
    sy.add_argument("--config", help="spec file (synth.* keys)")
    sy.add_argument("--seed", type=int, help="overrides synth.seed")
    sy.add_argument("--out", help="corpus file (default: standard output)")
    sy.add_argument("--traffic", help="also write a matching platform traffic CSV here")

    rp = sub.add_parser("report", help="re-render a stored csv or json report")
    rp.add_argument("--input", required=True, help="report written by analyze --format csv|json")
    rp.add_argument("--format", type=_format, default=OutputFormat.TABLE)
    rp.add_argument("--out", help="output file (default: standard output)")
    rp.add_argument("--plot", help="also write feature,grade bar-chart data here")
    return p


# --- output helpers ------------------------------------------------------------

def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise _write_error(out, exc) from None


def _cell(v) -> str:
    return "" if v is None else repr(v) if isinstance(v, float) else str(v)


def render_features(qids: Sequence[int], months: Sequence[str], features: Sequence[FeatureVector],
                    fmt: OutputFormat) -> str:
    header = ["qid", "month", *FEATURE_NAMES]
    rows = [[q, m, *fv.as_tuple()] for q, m, fv in zip(qids, months, features)]
    if fmt is OutputFormat.JSON:
        return "".join(json.dumps(dict(zip(header, r)), ensure_ascii=False) + "\n" for r in rows)
    if fmt is OutputFormat.CSV:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows([_cell(v) for v in r] for r in rows)
        return buf.getvalue()
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(_cell(v) for v in r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


# --- commands ------------------------------------------------------------------

def _cmd_extract(args) -> None:
    config = run_stage("config", load_config, args.config)
    records, load = run_stage("load", load_records, args.input)
    _report_rejects(load)
    stop, wh = run_stage("extract", lambda: (config.stopwords(), config.wh_words()))
    features = run_stage("extract", extract_all, records, stop, wh, config.counting_mode,
                        config.overlap_mode, config.workers)
    _emit(render_features([r.qid for r in records], [r.month for r in records], features, args.format),
          args.out)


def _cmd_analyze(args) -> None:
    config = run_stage("config", load_config, args.config)
    if args.workers is not None:
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        config = replace(config, workers=args.workers)
    report = run_pipeline(args.input, args.traffic, config)
    rejected = report.metadata.get("records_rejected_at_load", 0)
    if rejected:
        print(f"warning: {rejected} record line(s) rejected at load", file=sys.stderr)
    for w in report.metadata.get("low_sample_months", []):
        print(f"warning: {w['month']} has {w['count']} records (< {w['threshold']})", file=sys.stderr)
    _emit(render_report(report, args.format), args.out)
    if args.plot:
        run_stage("write", emit_plot_data, report, args.plot)


def _cmd_synth(args) -> None:
    spec = run_stage("config", load_spec, args.config)
    if args.seed is not None:
        spec = run_stage("config", replace, spec, seed=args.seed)
    records = gen_corpus(spec)
    if args.out is None:
        write_records(records, sys.stdout)
    else:
        try:
            write_records(records, args.out)
        except OSError as exc:
            raise _write_error(args.out, exc) from None
    if args.traffic:
        try:
            write_traffic(gen_traffic(spec), args.traffic)
        except OSError as exc:
            raise _write_error(args.traffic, exc) from None


def _cmd_report(args) -> None:
    report = run_stage("load", load_report, args.input)
    _emit(render_report(report, args.format), args.out)
    if args.plot:
        run_stage("write", emit_plot_data, report, args.plot)


def _write_error(path: str, exc: OSError) -> WriteFailure:
    err = WriteFailure(f"cannot write {path}: {exc.strerror}")
    err.stage = "write"
    return err


def _report_rejects(load) -> None:
    for lineno, msg in load.errors[:20]:
        print(f"warning: line {lineno} rejected: {msg}", file=sys.stderr)
    if load.n_rejected > 20:
        print(f"warning: ... {load.n_rejected - 20} more rejected lines", file=sys.stderr)


_COMMANDS = {"extract": _cmd_extract, "analyze": _cmd_analyze, "synth": _cmd_synth, "report": _cmd_report}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.error("a subcommand is required")
        _COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except QqgraError as exc:
        if exc.stage is None:
            exc.stage = args.command
        print(exc, file=sys.stderr)
        return EXIT_DATA
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not an error
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return EXIT_OK
    except OSError as exc:
        # unreadable inputs: missing files, permissions, directories
        name = exc.filename if exc.filename is not None else ""
        print(f"[load] {type(exc).__name__}: {exc.strerror}: {name}", file=sys.stderr)
        return EXIT_DATA
    except UnicodeDecodeError as exc:
        print(f"[load] UnicodeDecodeError: input is not UTF-8 ({exc.reason})", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
