"""Exception hierarchy.

Every error raised by the package derives from :class:`QqgraError`. The
pipeline stamps the failing stage onto ``stage`` before re-raising so callers
(and the CLI) can say where things went wrong.
"""

from __future__ import annotations


class QqgraError(Exception):
    """Base class. ``stage`` is filled in by the pipeline when known."""

    stage: str | None = None

    def __str__(self) -> str:
        msg = super().__str__()
        if self.stage:
            return f"[{self.stage}] {type(self).__name__}: {msg}"
        return msg


# --- grey relational analysis -------------------------------------------------

class DegenerateSeries(QqgraError):
    """A series is constant, so min-max normalization is undefined."""

    def __init__(self, name: str):
        super().__init__(f"series {name!r} is constant (max == min)")
        self.name = name


class LengthMismatch(QqgraError):
    def __init__(self, name: str, expected: int, got: int):
        super().__init__(f"series {name!r} has length {got}, expected {expected}")
        self.name = name


class OutOfRange(QqgraError):
    pass


# --- feature extraction -------------------------------------------------------

class EmptyTitle(QqgraError):
    pass


class EmptyText(QqgraError):
    pass


class ZeroLengthAnswer(QqgraError):
    pass


class NegativeLatency(QqgraError):
    pass


class LexiconError(QqgraError):
    pass


# --- ingestion and pipeline ---------------------------------------------------

class EmptyDataset(QqgraError):
    pass


class DuplicateMonth(QqgraError):
    pass


class MalformedRow(QqgraError):
    pass


class TooFewMonths(QqgraError):
    pass


class AllMissingInMonth(QqgraError):
    def __init__(self, feature: str, month: str):
        super().__init__(f"feature {feature!r} has no non-missing values in {month}")
        self.feature = feature
        self.month = month


class UnknownMember(QqgraError):
    pass


class MissingControlMonth(QqgraError):
    def __init__(self, months: list[str]):
        super().__init__("traffic series does not cover: " + ", ".join(months))
        self.months = months


class ConfigError(QqgraError):
    pass


# --- synthetic data and reporting ---------------------------------------------

class InvalidSpec(QqgraError):
    pass


class FeatureMismatch(QqgraError):
    pass


class WriteFailure(QqgraError):
    pass


class ReportFormatError(QqgraError):
    pass
