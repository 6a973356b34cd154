"""Deng's grey relational analysis (GRA).

The procedure has three steps:

1. min-max normalize every series (reference and comparatives) to [0, 1];
2. take absolute deviations of each comparative from the reference and turn
   them into grey relational coefficients

       coef(i, k) = (d_min + delta * d_max) / (d(i, k) + delta * d_max)

   where ``d_min``/``d_max`` are the global extremes over all rows and all
   time points and ``delta`` is the distinguishing coefficient;
3. average each row of coefficients into a grey relational grade.

Grades are then ranked (descending, stable) and bucketed into influence
classes.

Examples
--------
>>> from qqgra.gra import RawSeries, run_gra
>>> ref = RawSeries("pageviews", [1, 2, 3])
>>> res = run_gra(ref, [RawSeries("A", [3, 2, 1]), RawSeries("B", [1, 2, 3])])
>>> [(r.name, round(r.grade, 6), r.rank) for r in res]
[('B', 1.0, 1), ('A', 0.555556, 2)]
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSeries, LengthMismatch, OutOfRange


class Direction(enum.Enum):
    HIGHER_BETTER = "higher_better"
    LOWER_BETTER = "lower_better"


class InfluenceClass(enum.Enum):
    """Influence of a comparative on the reference, strongest first."""

    MARKED = "Marked"
    RELATIVELY_MARKED = "Relatively marked"
    NOTICEABLE = "Noticeable"
    WEAK = "Weak"
    NEGLIGIBLE = "Negligible"

    @property
    def strength(self) -> int:
        # Higher is stronger; gives the classes a total order.
        return len(_CLASS_ORDER) - _CLASS_ORDER.index(self)

    def __lt__(self, other):
        if not isinstance(other, InfluenceClass):
            return NotImplemented
        return self.strength < other.strength


_CLASS_ORDER = list(InfluenceClass)


@dataclass(frozen=True)
class RawSeries:
    name: str
    values: tuple[float, ...]
    direction: Direction = Direction.HIGHER_BETTER

    def __init__(self, name, values, direction=Direction.HIGHER_BETTER):
        vals = tuple(float(v) for v in values)
        if len(vals) < 2:
            raise ValueError(f"series {name!r} needs at least 2 values, got {len(vals)}")
        if not all(np.isfinite(vals)):
            raise ValueError(f"series {name!r} contains non-finite values")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "direction", Direction(direction))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class NormalizedSeries:
    name: str
    values: np.ndarray

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class DeviationMatrix:
    names: tuple[str, ...]
    rows: np.ndarray  # shape (m, n)
    delta_min: float
    delta_max: float


@dataclass(frozen=True)
class CoefficientMatrix:
    names: tuple[str, ...]
    rows: np.ndarray  # shape (m, n)


@dataclass(frozen=True)
class GraConfig:
    """``delta`` is the distinguishing coefficient; ``thresholds`` are the
    lower bounds of Marked, Relatively marked, Noticeable and Weak."""

    delta: float = 0.5
    thresholds: tuple[float, float, float, float] = (0.9, 0.8, 0.7, 0.6)

    def __post_init__(self):
        if not (0.0 < self.delta <= 1.0):
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        t = tuple(float(x) for x in self.thresholds)
        if len(t) != 4 or any(a <= b for a, b in zip(t, t[1:])):
            raise ValueError(f"thresholds must be 4 strictly decreasing values, got {t}")
        object.__setattr__(self, "thresholds", t)


@dataclass(frozen=True)
class GradeResult:
    name: str
    grade: float
    rank: int
    influence: InfluenceClass = field(compare=True)


def normalize(series: RawSeries) -> NormalizedSeries:
    """Min-max normalize a series to [0, 1] according to its direction."""
    x = np.asarray(series.values, dtype=float)
    lo, hi = x.min(), x.max()
    if hi == lo:
        raise DegenerateSeries(series.name)
    span = hi - lo
    if series.direction is Direction.LOWER_BETTER:
        out = (hi - x) / span
    else:
        out = (x - lo) / span
    return NormalizedSeries(series.name, out)


def deviation_matrix(reference: NormalizedSeries,
                     comparatives: Sequence[NormalizedSeries]) -> DeviationMatrix:
    if not comparatives:
        raise ValueError("at least one comparative series is required")
    n = len(reference)
    for c in comparatives:
        if len(c) != n:
            raise LengthMismatch(c.name, n, len(c))
    ref = np.asarray(reference.values, dtype=float)
    rows = np.abs(ref[None, :] - np.vstack([c.values for c in comparatives]))
    return DeviationMatrix(
        names=tuple(c.name for c in comparatives),
        rows=rows,
        delta_min=float(rows.min()),
        delta_max=float(rows.max()),
    )


# Normalized values live on [0, 1]; deviations this small are rounding noise
# from normalization (e.g. of a rescaled copy of the reference), and the
# scale-free coefficient formula would otherwise blow that noise up.
COINCIDENCE_TOL = 1e-9


def grey_coefficients(dev: DeviationMatrix, config: GraConfig | None = None) -> CoefficientMatrix:
    config = config or GraConfig()
    if dev.delta_max <= COINCIDENCE_TOL:
        # Every comparative coincides with the reference.
        return CoefficientMatrix(dev.names, np.ones_like(dev.rows))
    scaled = config.delta * dev.delta_max
    coeffs = (dev.delta_min + scaled) / (dev.rows + scaled)
    return CoefficientMatrix(dev.names, coeffs)


def relational_grades(coeffs: CoefficientMatrix) -> list[float]:
    return [float(g) for g in coeffs.rows.mean(axis=1)]


def classify_influence(grade: float, config: GraConfig | None = None) -> InfluenceClass:
    if not (0.0 < grade <= 1.0):
        raise OutOfRange(f"grade {grade!r} outside (0, 1]")
    marked, rel, noticeable, weak = (config or GraConfig()).thresholds
    if grade > marked:
        return InfluenceClass.MARKED
    if grade > rel:
        return InfluenceClass.RELATIVELY_MARKED
    if grade > noticeable:
        return InfluenceClass.NOTICEABLE
    if grade >= weak:
        return InfluenceClass.WEAK
    return InfluenceClass.NEGLIGIBLE


def rank(grades: Iterable[tuple[str, float]], config: GraConfig | None = None) -> list[GradeResult]:
    """Sort (name, grade) pairs by grade descending; ties keep input order."""
    pairs = list(grades)
    for name, g in pairs:
        if not np.isfinite(g):
            raise ValueError(f"grade for {name!r} is not finite")
    ordered = sorted(pairs, key=lambda p: -p[1])  # sorted() is stable
    return [
        GradeResult(name, float(g), i, classify_influence(g, config))
        for i, (name, g) in enumerate(ordered, start=1)
    ]


def run_gra(reference: RawSeries, comparatives: Sequence[RawSeries],
            config: GraConfig | None = None) -> list[GradeResult]:
    """Grade and rank each comparative against the reference.

    Raises DegenerateSeries or LengthMismatch naming the offending series.
    """
    config = config or GraConfig()
    n = len(reference)
    for c in comparatives:
        if len(c) != n:
            raise LengthMismatch(c.name, n, len(c))
    ref = normalize(reference)
    comps = [normalize(c) for c in comparatives]
    dev = deviation_matrix(ref, comps)
    grades = relational_grades(grey_coefficients(dev, config))
    return rank(zip(dev.names, grades), config)
