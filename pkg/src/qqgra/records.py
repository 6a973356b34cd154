"""Question records and platform traffic: types, parsing, and file I/O.

Question records are stored one JSON object per line::

    {"qid": 66080123, "created_at": "2017-10-02T08:15:00Z", "title": "...",
     "detail": "...", "pageviews": 311, "follower_count": 4,
     "comment_count": 0,
     "answers": [{"created_at": "...", "content": "...", "voteup_count": 12}],
     "questioner": {"follower_count": 10, "answer_count": 3,
                    "voteup_received": 40, "thanks_received": 2,
                    "badge_count": 0, "anonymous": false}}

Unknown keys are ignored. Timestamps without an offset are taken as UTC.

Traffic files are CSV with a ``month,visits`` header and ``YYYY-MM`` months.
"""

from __future__ import annotations

import contextlib
import csv
import gc
import io
import json
import os
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Iterable

from .errors import DuplicateMonth, EmptyDataset, MalformedRow


@dataclass(frozen=True)
class Answer:
    created_at: datetime
    content: str
    voteup_count: int


@dataclass(frozen=True)
class Questioner:
    follower_count: int
    answer_count: int
    voteup_received: int
    thanks_received: int
    badge_count: int
    anonymous: bool = False


@dataclass(frozen=True)
class QuestionRecord:
    qid: int
    created_at: datetime
    title: str
    detail: str
    pageviews: int
    follower_count: int
    comment_count: int
    answers: tuple[Answer, ...]
    questioner: Questioner

    @property
    def month(self) -> str:
        ts = self.created_at
        return f"{ts.year:04d}-{ts.month:02d}"

    @classmethod
    def from_dict(cls, obj: dict) -> "QuestionRecord":
        """Build a record from a decoded JSON object, validating as we go.

        Raises ValueError describing the first problem found.
        """
        if not isinstance(obj, dict):
            raise ValueError("record is not a JSON object")
        qid = _count(obj, "qid")
        if qid <= 0:
            raise ValueError("qid must be positive")
        created = parse_timestamp(_field(obj, "created_at"))
        title = _text(obj, "title")
        if not title.strip():
            raise ValueError("title is empty")
        detail = _text(obj, "detail")

        raw_answers = _field(obj, "answers")
        if not isinstance(raw_answers, list):
            raise ValueError("answers must be a list")
        answers = []
        for i, a in enumerate(raw_answers):
            if not isinstance(a, dict):
                raise ValueError(f"answers[{i}] is not an object")
            at = parse_timestamp(_field(a, "created_at"))
            if at < created:
                raise ValueError(f"answers[{i}] predates the question")
            content = _text(a, "content")
            if not content:
                raise ValueError(f"answers[{i}] has empty content")
            answers.append(Answer(at, content, _count(a, "voteup_count")))

        q = _field(obj, "questioner")
        if not isinstance(q, dict):
            raise ValueError("questioner must be an object")
        anonymous = _field(q, "anonymous")
        if not isinstance(anonymous, bool):
            raise ValueError("questioner.anonymous must be a boolean")
        questioner = Questioner(*_counts(q, _QUESTIONER_COUNTS), anonymous=anonymous)
        pageviews, follower_count, comment_count = _counts(obj, _RECORD_COUNTS)
        return cls(
            qid=qid,
            created_at=created,
            title=title,
            detail=detail,
            pageviews=pageviews,
            follower_count=follower_count,
            comment_count=comment_count,
            answers=tuple(answers),
            questioner=questioner,
        )

    def to_dict(self) -> dict:
        q = self.questioner
        return {
            "qid": self.qid,
            "created_at": format_timestamp(self.created_at),
            "title": self.title,
            "detail": self.detail,
            "pageviews": self.pageviews,
            "follower_count": self.follower_count,
            "comment_count": self.comment_count,
            "answers": [
                {"created_at": format_timestamp(a.created_at), "content": a.content,
                 "voteup_count": a.voteup_count}
                for a in self.answers
            ],
            "questioner": {
                "follower_count": q.follower_count,
                "answer_count": q.answer_count,
                "voteup_received": q.voteup_received,
                "thanks_received": q.thanks_received,
                "badge_count": q.badge_count,
                "anonymous": q.anonymous,
            },
        }


_MISSING = object()


def _field(obj: dict, key: str):
    v = obj.get(key, _MISSING)
    if v is _MISSING:
        raise ValueError(f"missing required field {key!r}")
    return v


def _count(obj: dict, key: str) -> int:
    v = obj.get(key, _MISSING)
    if type(v) is int and v >= 0:
        return v
    if v is _MISSING:
        raise ValueError(f"missing required field {key!r}")
    raise ValueError(f"{key!r} must be a nonnegative integer, got {v!r}")


_QUESTIONER_COUNTS = ("follower_count", "answer_count", "voteup_received",
                      "thanks_received", "badge_count")
_RECORD_COUNTS = ("pageviews", "follower_count", "comment_count")


def _counts(obj: dict, keys: tuple[str, ...]) -> list[int]:
    vals = [obj.get(k) for k in keys]
    for v in vals:
        if type(v) is not int or v < 0:
            # slow path, for the error message
            return [_count(obj, k) for k in keys]
    return vals


def _text(obj: dict, key: str) -> str:
    v = _field(obj, key)
    if not isinstance(v, str):
        raise ValueError(f"{key!r} must be a string")
    return v


def parse_timestamp(value) -> datetime:
    if not isinstance(value, str):
        raise ValueError(f"timestamp must be a string, got {value!r}")
    s = value.strip()
    utc = s[-1:] in ("Z", "z")
    try:
        # fromisoformat() only learned about "Z" in 3.11
        ts = datetime.fromisoformat(s[:-1] + "+00:00" if utc else s)
    except ValueError:
        raise ValueError(f"unparseable timestamp {value!r}") from None
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    if ts.utcoffset():
        return ts.astimezone(timezone.utc)
    return ts


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class LoadReport:
    lines_read: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)

    @property
    def n_rejected(self) -> int:
        return len(self.errors)


@contextlib.contextmanager
def gc_paused():
    """Suspend cyclic garbage collection for bulk creation of acyclic objects.

    Building tens of thousands of records otherwise triggers repeated full
    collections that dominate load time.
    """
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def parse_records(lines: Iterable[str]) -> tuple[list[QuestionRecord], LoadReport]:
    """Parse line-delimited records. Bad lines are skipped and reported."""
    with gc_paused():
        return _parse_records(lines)


def _parse_records(lines: Iterable[str]) -> tuple[list[QuestionRecord], LoadReport]:
    report = LoadReport()
    records: list[QuestionRecord] = []
    seen: set[int] = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        report.lines_read += 1
        try:
            rec = QuestionRecord.from_dict(json.loads(line))
        except json.JSONDecodeError as exc:
            report.errors.append((lineno, f"invalid JSON: {exc.msg}"))
            continue
        except ValueError as exc:
            report.errors.append((lineno, str(exc)))
            continue
        if rec.qid in seen:
            report.errors.append((lineno, f"duplicate qid {rec.qid}"))
            continue
        seen.add(rec.qid)
        records.append(rec)
    return records, report


def load_records(path: str | os.PathLike) -> tuple[list[QuestionRecord], LoadReport]:
    """Read a records file.

    Raises FileNotFoundError if the file is absent and EmptyDataset if no line
    yields a valid record.
    """
    with open(path, encoding="utf-8") as fh:
        records, report = parse_records(fh)
    if not records:
        raise EmptyDataset(f"no valid records in {os.fspath(path)} "
                           f"({report.lines_read} non-blank lines, {report.n_rejected} rejected)")
    return records, report


def write_records(records: Iterable[QuestionRecord], out: str | os.PathLike | IO[str]) -> None:
    if isinstance(out, (str, os.PathLike)):
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            write_records(records, fh)
        return
    for rec in records:
        out.write(json.dumps(rec.to_dict(), ensure_ascii=False, separators=(",", ":")))
        out.write("\n")


# --- platform traffic ----------------------------------------------------------

_MONTH_RE = re.compile(r"^(\d{4})-(0[1-9]|1[0-2])$")


@dataclass(frozen=True)
class TrafficSeries:
    points: tuple[tuple[str, int], ...]

    @property
    def months(self) -> list[str]:
        return [m for m, _ in self.points]

    def as_dict(self) -> dict[str, int]:
        return dict(self.points)


def parse_traffic(text: str) -> TrafficSeries:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [(i, r) for i, r in enumerate(rows, start=1) if any(c.strip() for c in r)]
    if not rows or [c.strip().lower() for c in rows[0][1]] != ["month", "visits"]:
        raise MalformedRow("row 1: expected header 'month,visits'")
    seen: dict[str, int] = {}
    for rowno, row in rows[1:]:
        if len(row) != 2:
            raise MalformedRow(f"row {rowno}: expected 2 columns, got {len(row)}")
        month, visits = row[0].strip(), row[1].strip()
        if not _MONTH_RE.match(month):
            raise MalformedRow(f"row {rowno}: month {month!r} is not YYYY-MM")
        try:
            n = int(visits)
        except ValueError:
            raise MalformedRow(f"row {rowno}: visits {visits!r} is not an integer") from None
        if n < 0:
            raise MalformedRow(f"row {rowno}: visits must be nonnegative")
        if month in seen:
            raise DuplicateMonth(f"row {rowno}: month {month} appears twice")
        seen[month] = n
    return TrafficSeries(tuple(sorted(seen.items())))


def load_traffic(path: str | os.PathLike) -> TrafficSeries:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_traffic(fh.read())


def write_traffic(traffic: TrafficSeries, out: str | os.PathLike) -> None:
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write("month,visits\n")
        for m, v in traffic.points:
            fh.write(f"{m},{v}\n")
