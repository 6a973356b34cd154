"""GRA reports and their renderings.

Three output formats are supported:

``table``
    Markdown tables (Rank | Feature | Grade | Class) for features and for
    feature groups, grades to six decimals.
``csv``
    Blank-line separated blocks: ``rank,feature,grade,class,group``, then
    ``group,grade,class``, an optional ``control,grade,class`` block and a
    ``key,value`` metadata block (values JSON-encoded). Grades are written at
    full precision so the block parses back to an identical report.
``json``
    One JSON document with every report field.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import os
from dataclasses import dataclass, field
from typing import IO

from .errors import ReportFormatError, WriteFailure
from .features import feature_label
from .gra import InfluenceClass

CONTROL_NAME = "platform_traffic"


class OutputFormat(enum.Enum):
    TABLE = "table"
    CSV = "csv"
    JSON = "json"

    @classmethod
    def parse(cls, name: str) -> "OutputFormat":
        aliases = {"md": "table", "markdown": "table", "plain": "table", "txt": "table"}
        return cls(aliases.get(name.lower(), name.lower()))


@dataclass(frozen=True)
class FeatureRow:
    rank: int
    feature: str
    grade: float
    influence: InfluenceClass
    group: str | None


@dataclass(frozen=True)
class GroupRow:
    rank: int
    group: str
    grade: float
    influence: InfluenceClass


@dataclass(frozen=True)
class ControlRow:
    grade: float
    influence: InfluenceClass
    name: str = CONTROL_NAME


@dataclass(frozen=True)
class GraReport:
    feature_rows: tuple[FeatureRow, ...]
    group_rows: tuple[GroupRow, ...] = ()
    control_row: ControlRow | None = None
    metadata: dict = field(default_factory=dict, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "feature_rows", tuple(self.feature_rows))
        object.__setattr__(self, "group_rows", tuple(self.group_rows))
        for rows, what in ((self.feature_rows, "feature"), (self.group_rows, "group")):
            if [r.rank for r in rows] != list(range(1, len(rows) + 1)):
                raise ReportFormatError(f"{what} ranks must run 1..{len(rows)}")
            if any(a.grade < b.grade for a, b in zip(rows, rows[1:])):
                raise ReportFormatError(f"{what} rows must be sorted by grade, descending")
        if self.group_rows:
            known = {g.group for g in self.group_rows} | set(self.metadata.get("degenerate_groups", []))
            for r in self.feature_rows:
                if r.group is not None and r.group not in known:
                    raise ReportFormatError(f"feature {r.feature!r} names unknown group {r.group!r}")

    @property
    def features(self) -> list[str]:
        return [r.feature for r in self.feature_rows]

    def grade_of(self, feature: str) -> float:
        for r in self.feature_rows:
            if r.feature == feature:
                return r.grade
        raise KeyError(feature)

    def rank_of(self, feature: str) -> int:
        for r in self.feature_rows:
            if r.feature == feature:
                return r.rank
        raise KeyError(feature)


# --- rendering -----------------------------------------------------------------

def _g6(x: float) -> str:
    return f"{x:.6f}"


def _render_table(report: GraReport) -> str:
    md = report.metadata
    out = ["# Grey relational analysis report", ""]
    summary = []
    if "delta" in md:
        summary.append(f"delta = {md['delta']}")
    months = md.get("months")
    if months:
        summary.append(f"months = {months[0]}..{months[-1]} ({len(months)})")
    if "records_in" in md:
        summary.append(f"records = {md['records_in']} loaded, {md.get('records_kept', '?')} kept")
    if summary:
        out += ["; ".join(summary), ""]

    out += ["## Features", "", "| Rank | Feature | Grade | Class |", "|---:|---|---:|---|"]
    for r in report.feature_rows:
        out.append(f"| {r.rank} | {feature_label(r.feature)} | {_g6(r.grade)} | {r.influence.value} |")

    if report.group_rows:
        out += ["", "## Feature groups", "", "| Rank | Group | Grade | Class |", "|---:|---|---:|---|"]
        for g in report.group_rows:
            out.append(f"| {g.rank} | {g.group} | {_g6(g.grade)} | {g.influence.value} |")

    if report.control_row is not None:
        c = report.control_row
        out += ["", "## Control", "", "| Series | Grade | Class |", "|---|---:|---|",
                f"| {c.name} | {_g6(c.grade)} | {c.influence.value} |"]

    notes = []
    for name in md.get("degenerate_features", []):
        notes.append(f"feature {name} is constant across months and was not graded")
    for name in md.get("degenerate_groups", []):
        notes.append(f"group {name} is constant across months and was not graded")
    for w in md.get("low_sample_months", []):
        notes.append(f"{w['month']}: only {w['count']} records (threshold {w['threshold']})")
    if notes:
        out += ["", "## Warnings", ""] + [f"- {n}" for n in notes]
    return "\n".join(out) + "\n"


def _render_csv(report: GraReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "feature", "grade", "class", "group"])
    for r in report.feature_rows:
        w.writerow([r.rank, r.feature, repr(r.grade), r.influence.value, r.group or ""])
    buf.write("\n")
    w.writerow(["group", "grade", "class"])
    for g in report.group_rows:
        w.writerow([g.group, repr(g.grade), g.influence.value])
    if report.control_row is not None:
        c = report.control_row
        buf.write("\n")
        w.writerow(["control", "grade", "class"])
        w.writerow([c.name, repr(c.grade), c.influence.value])
    buf.write("\n")
    w.writerow(["key", "value"])
    for k in sorted(report.metadata):
        w.writerow([k, json.dumps(report.metadata[k], sort_keys=True, ensure_ascii=False)])
    return buf.getvalue()


def report_to_dict(report: GraReport) -> dict:
    return {
        "feature_rows": [
            {"rank": r.rank, "feature": r.feature, "label": feature_label(r.feature),
             "grade": r.grade, "class": r.influence.value, "group": r.group}
            for r in report.feature_rows
        ],
        "group_rows": [
            {"rank": g.rank, "group": g.group, "grade": g.grade, "class": g.influence.value}
            for g in report.group_rows
        ],
        "control_row": None if report.control_row is None else {
            "name": report.control_row.name, "grade": report.control_row.grade,
            "class": report.control_row.influence.value,
        },
        "metadata": report.metadata,
    }


def report_from_dict(obj: dict) -> GraReport:
    try:
        ctrl = obj.get("control_row")
        return GraReport(
            feature_rows=tuple(
                FeatureRow(int(r["rank"]), r["feature"], float(r["grade"]),
                           InfluenceClass(r["class"]), r.get("group"))
                for r in obj["feature_rows"]
            ),
            group_rows=tuple(
                GroupRow(int(g["rank"]), g["group"], float(g["grade"]), InfluenceClass(g["class"]))
                for g in obj.get("group_rows", [])
            ),
            control_row=None if ctrl is None else ControlRow(
                float(ctrl["grade"]), InfluenceClass(ctrl["class"]), ctrl.get("name", CONTROL_NAME)),
            metadata=dict(obj.get("metadata", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ReportFormatError(f"malformed report document: {exc}") from None


def render_report(report: GraReport, fmt: OutputFormat | str = OutputFormat.TABLE) -> str:
    fmt = OutputFormat.parse(fmt) if isinstance(fmt, str) else fmt
    if fmt is OutputFormat.TABLE:
        return _render_table(report)
    if fmt is OutputFormat.CSV:
        return _render_csv(report)
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# --- parsing -------------------------------------------------------------------

def _csv_blocks(text: str) -> list[list[list[str]]]:
    blocks, cur = [], []
    for row in csv.reader(io.StringIO(text)):
        if not row or not any(c.strip() for c in row):
            if cur:
                blocks.append(cur)
                cur = []
            continue
        cur.append(row)
    if cur:
        blocks.append(cur)
    return blocks


def parse_csv_report(text: str) -> GraReport:
    features, groups, control, metadata = [], [], None, {}
    try:
        for block in _csv_blocks(text):
            header, rows = block[0], block[1:]
            if header == ["rank", "feature", "grade", "class", "group"]:
                features = [FeatureRow(int(r[0]), r[1], float(r[2]), InfluenceClass(r[3]), r[4] or None)
                            for r in rows]
            elif header == ["group", "grade", "class"]:
                groups = [GroupRow(i, r[0], float(r[1]), InfluenceClass(r[2]))
                          for i, r in enumerate(rows, start=1)]
            elif header == ["control", "grade", "class"]:
                (r,) = rows
                control = ControlRow(float(r[1]), InfluenceClass(r[2]), r[0])
            elif header == ["key", "value"]:
                metadata = {r[0]: json.loads(r[1]) for r in rows}
            else:
                raise ReportFormatError(f"unrecognised CSV block header {header}")
    except (IndexError, ValueError) as exc:
        raise ReportFormatError(f"malformed CSV report: {exc}") from None
    return GraReport(tuple(features), tuple(groups), control, metadata)


def parse_report(text: str, fmt: OutputFormat | str) -> GraReport:
    fmt = OutputFormat.parse(fmt) if isinstance(fmt, str) else fmt
    if fmt is OutputFormat.CSV:
        return parse_csv_report(text)
    if fmt is OutputFormat.JSON:
        try:
            return report_from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ReportFormatError(f"report is not valid JSON: {exc}") from None
    raise ReportFormatError("table output is for reading, not parsing")


def load_report(path: str | os.PathLike) -> GraReport:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    fmt = OutputFormat.JSON if text.lstrip().startswith("{") else OutputFormat.CSV
    return parse_report(text, fmt)


def emit_plot_data(report: GraReport, out: str | os.PathLike | IO[str]) -> None:
    """Write ``feature,grade`` bar-chart rows, highest grade first."""
    if not report.feature_rows:
        raise WriteFailure("report has no feature rows to plot")
    if isinstance(out, (str, os.PathLike)):
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                emit_plot_data(report, fh)
        except OSError as exc:
            raise WriteFailure(f"cannot write {os.fspath(out)}: {exc.strerror}") from None
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["feature", "grade"])
    for r in sorted(report.feature_rows, key=lambda r: -r.grade):
        w.writerow([feature_label(r.feature), _g6(r.grade)])
