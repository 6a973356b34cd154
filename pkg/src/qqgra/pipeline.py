"""End-to-end pipeline: records -> features -> cleaning -> monthly series -> GRA.

The reference series is the monthly mean pageview count of the sampled
questions; comparatives are the monthly means of each feature and the
per-month sums of those means over each feature group. Platform traffic,
when supplied, is graded alongside the features but reported separately.

All reductions use ``math.fsum`` over a fixed record order, so results do not
depend on how feature extraction was parallelised.
"""

from __future__ import annotations

import math
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import __version__
from .config import CleaningRules, GroupSpec, PipelineConfig
from .errors import (
    AllMissingInMonth,
    DegenerateSeries,
    QqgraError,
    TooFewMonths,
    UnknownMember,
    MissingControlMonth,
)
from .features import (
    FEATURE_NAMES,
    CountingMode,
    FeatureVector,
    Lexicon,
    OverlapMode,
    extract_features,
)
from .gra import Direction, RawSeries, run_gra
from .records import QuestionRecord, TrafficSeries, gc_paused, load_records, load_traffic
from .report import CONTROL_NAME, ControlRow, FeatureRow, GraReport, GroupRow


# --- feature extraction --------------------------------------------------------

def _extract_chunk(args) -> list[FeatureVector]:
    records, stopwords, wh_words, mode, overlap_mode = args
    with gc_paused():
        return [extract_features(r, stopwords, wh_words, mode, overlap_mode)
                for r in records]


# Set in the parent just before forking so workers inherit the inputs instead
# of receiving them pickled.
_SHARED: tuple | None = None


def _extract_shared(bounds: tuple[int, int]) -> list[tuple]:
    records, *rest = _SHARED
    part = _extract_chunk((records[bounds[0]:bounds[1]], *rest))
    return [fv.as_tuple() for fv in part]


def _extract_pickled(args) -> list[tuple]:
    return [fv.as_tuple() for fv in _extract_chunk(args)]


def _usable_cpus() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def extract_all(records: Sequence[QuestionRecord], stopwords: Lexicon, wh_words: Lexicon,
                mode: CountingMode = CountingMode.CHARACTERS,
                overlap_mode: OverlapMode = OverlapMode.OVERLAP,
                workers: int = 1) -> list[FeatureVector]:
    """Extract features for every record, preserving input order.

    ``workers`` is capped at the number of usable CPUs; more processes than
    cores only adds fork and pickling overhead. Output never depends on it.
    """
    global _SHARED
    workers = min(workers, _usable_cpus())
    if workers <= 1 or len(records) < 2 * workers:
        return _extract_chunk((records, stopwords, wh_words, mode, overlap_mode))
    size = math.ceil(len(records) / workers)
    bounds = [(i, min(i + size, len(records))) for i in range(0, len(records), size)]
    if "fork" in multiprocessing.get_all_start_methods():
        _SHARED = (records, stopwords, wh_words, mode, overlap_mode)
        try:
            with ProcessPoolExecutor(workers, multiprocessing.get_context("fork")) as pool:
                parts = list(pool.map(_extract_shared, bounds))
        finally:
            _SHARED = None
    else:
        chunks = [(list(records[a:b]), stopwords, wh_words, mode, overlap_mode) for a, b in bounds]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_extract_pickled, chunks))
    return [FeatureVector(*t) for part in parts for t in part]


# --- cleaning ------------------------------------------------------------------

@dataclass
class CleaningReport:
    records_in: int
    anonymous_dropped: int = 0
    removed_by_feature: dict[str, int] = field(default_factory=dict)
    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    records_out: int = 0


def _mean(values: Sequence[float]) -> float:
    # fsum()/n can land one ulp outside [min, max]; clamp it back
    mu = math.fsum(values) / len(values)
    return min(max(mu, min(values)), max(values))


def _feature_matrix(features: Sequence[FeatureVector]) -> np.ndarray:
    """Features as an (n, 15) float array with NaN for missing values."""
    rows = [fv.as_tuple() for fv in features]
    return np.array(rows, dtype=float).reshape(len(rows), len(FEATURE_NAMES))


def mean_sd(values: Sequence[float], ddof: int = 0) -> tuple[float, float]:
    n = len(values)
    mu = _mean(values)
    if n - ddof <= 0:
        return mu, 0.0
    dev = np.asarray(values, dtype=float) - mu
    return mu, math.sqrt(math.fsum((dev * dev).tolist()) / (n - ddof))


def clean_records(records: Sequence[QuestionRecord], features: Sequence[FeatureVector],
                  rules: CleaningRules | None = None):
    """Drop anonymous questions, then sigma-clip the eligible features.

    Bounds for every eligible feature are computed on the same
    (post-anonymous-filter) population; a record is dropped when any of its
    non-missing eligible values falls outside ``mean +/- sigma * sd``.
    Returns ``(records, features, CleaningReport)``.
    """
    rules = rules or CleaningRules()
    if len(records) != len(features):
        raise ValueError("records and features must align 1:1")
    report = CleaningReport(records_in=len(records))
    pairs = list(zip(records, features))
    if rules.drop_anonymous:
        kept = [p for p in pairs if not p[0].questioner.anonymous]
        report.anonymous_dropped = len(pairs) - len(kept)
        pairs = kept

    matrix = _feature_matrix([fv for _, fv in pairs])
    drop = np.zeros(len(pairs), dtype=bool)
    for name in rules.outlier_eligible:
        report.removed_by_feature[name] = 0
        if name not in FEATURE_NAMES:
            continue
        col = matrix[:, FEATURE_NAMES.index(name)]
        xs = col[~np.isnan(col)]
        if not xs.size or xs.min() == xs.max():
            continue
        mu, sd = mean_sd(xs.tolist(), rules.sd_ddof)
        lo, hi = mu - rules.sigma * sd, mu + rules.sigma * sd
        report.bounds[name] = (lo, hi)
        # NaN (missing) compares False on both sides, so it never drops a record
        out = (col < lo) | (col > hi)
        report.removed_by_feature[name] = int(out.sum())
        drop |= out

    pairs = [p for p, d in zip(pairs, drop.tolist()) if not d]
    report.records_out = len(pairs)
    return [p[0] for p in pairs], [p[1] for p in pairs], report


# --- monthly aggregation -------------------------------------------------------

@dataclass
class MonthlyBuckets:
    months: list[str]
    # month -> [(pageviews, FeatureVector)] in input order
    items: dict[str, list[tuple[int, FeatureVector]]]
    low_sample: list[dict] = field(default_factory=list)


def bucket_monthly(records: Sequence[QuestionRecord], features: Sequence[FeatureVector],
                   min_samples_per_month: int = 2000) -> MonthlyBuckets:
    items: dict[str, list[tuple[int, FeatureVector]]] = {}
    for rec, fv in zip(records, features):
        items.setdefault(rec.month, []).append((rec.pageviews, fv))
    months = sorted(items)
    low = [{"month": m, "count": len(items[m]), "threshold": min_samples_per_month}
           for m in months if len(items[m]) < min_samples_per_month]
    return MonthlyBuckets(months, {m: items[m] for m in months}, low)


@dataclass(frozen=True)
class MonthlySeriesSet:
    months: tuple[str, ...]
    reference: tuple[float, ...]
    comparatives: dict[str, tuple[float, ...]]
    sample_counts: dict[str, int]
    missing_counts: dict[str, dict[str, int]]
    groups: dict[str, tuple[float, ...]] = field(default_factory=dict)
    control: tuple[float, ...] | None = None


def monthly_means(buckets: MonthlyBuckets, min_months: int = 2) -> MonthlySeriesSet:
    """Per-month mean pageviews and per-feature means over non-missing values.

    GRA needs at least two time points; ``min_months=1`` is only useful for
    inspecting a single month's aggregates.
    """
    if len(buckets.months) < max(min_months, 1):
        raise TooFewMonths(f"need at least {min_months} months of data, got {len(buckets.months)}")
    reference = []
    series: dict[str, list[float]] = {f: [] for f in FEATURE_NAMES}
    missing: dict[str, dict[str, int]] = {f: {} for f in FEATURE_NAMES}
    for m in buckets.months:
        rows = buckets.items[m]
        reference.append(_mean([pv for pv, _ in rows]))
        matrix = _feature_matrix([fv for _, fv in rows])
        for f, col in zip(FEATURE_NAMES, matrix.T):
            present = col[~np.isnan(col)]
            if not present.size:
                raise AllMissingInMonth(f, m)
            missing[f][m] = len(col) - present.size
            series[f].append(_mean(present.tolist()))
    return MonthlySeriesSet(
        months=tuple(buckets.months),
        reference=tuple(reference),
        comparatives={f: tuple(v) for f, v in series.items()},
        sample_counts={m: len(buckets.items[m]) for m in buckets.months},
        missing_counts=missing,
    )


def group_composites(series_set: MonthlySeriesSet, groups: GroupSpec | None = None) -> MonthlySeriesSet:
    """Add one series per group: the month-wise sum of its members' means."""
    groups = groups or GroupSpec()
    out: dict[str, tuple[float, ...]] = {}
    for g, members in groups.groups.items():
        for m in members:
            if m not in series_set.comparatives:
                raise UnknownMember(f"group {g!r} references unknown feature {m!r}")
        cols = [series_set.comparatives[m] for m in members]
        out[g] = tuple(math.fsum(vals) for vals in zip(*cols))
    return replace(series_set, groups=out)


def attach_control(series_set: MonthlySeriesSet, traffic: TrafficSeries | None) -> MonthlySeriesSet:
    if traffic is None:
        return series_set
    visits = traffic.as_dict()
    uncovered = [m for m in series_set.months if m not in visits]
    if uncovered:
        raise MissingControlMonth(uncovered)
    return replace(series_set, control=tuple(float(visits[m]) for m in series_set.months))


# --- orchestration -------------------------------------------------------------

def run_stage(name: str, fn, *args, **kwargs):
    """Call ``fn``, labelling any package error it raises with ``name``."""
    try:
        return fn(*args, **kwargs)
    except QqgraError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


def _is_constant(values: Sequence[float]) -> bool:
    return min(values) == max(values)


def grade_series(series_set: MonthlySeriesSet, config: PipelineConfig) -> GraReport:
    """Run GRA on the features (plus control) and, separately, on the groups."""
    ref = RawSeries("pageviews", series_set.reference)
    if _is_constant(ref.values):
        raise DegenerateSeries("pageviews")

    comps, degenerate = [], []
    for f in FEATURE_NAMES:
        vals = series_set.comparatives[f]
        if _is_constant(vals):
            degenerate.append(f)
            continue
        comps.append(RawSeries(f, vals, config.directions.get(f, Direction.HIGHER_BETTER)))
    control_included = series_set.control is not None and not _is_constant(series_set.control)
    if control_included:
        comps.append(RawSeries(CONTROL_NAME, series_set.control))
    if not comps:
        raise DegenerateSeries("all feature series")

    results = run_gra(ref, comps, config.gra)
    control_row = None
    feature_rows = []
    for r in results:
        if r.name == CONTROL_NAME:
            control_row = ControlRow(r.grade, r.influence)
            continue
        feature_rows.append(FeatureRow(len(feature_rows) + 1, r.name, r.grade, r.influence,
                                       config.groups.group_of(r.name)))

    group_rows, degenerate_groups = [], []
    gcomps = []
    for g, vals in series_set.groups.items():
        if _is_constant(vals):
            degenerate_groups.append(g)
        else:
            gcomps.append(RawSeries(g, vals))
    if gcomps:
        for r in run_gra(ref, gcomps, config.gra):
            group_rows.append(GroupRow(r.rank, r.name, r.grade, r.influence))

    metadata = {
        "tool_version": __version__,
        "delta": config.gra.delta,
        "months": list(series_set.months),
        "sample_counts": dict(series_set.sample_counts),
        "degenerate_features": degenerate,
        "degenerate_groups": degenerate_groups,
        "control_graded": control_included,
        "missing_counts": {f: c for f, c in series_set.missing_counts.items() if any(c.values())},
        "config": config.echo(),
    }
    return GraReport(tuple(feature_rows), tuple(group_rows), control_row, metadata)


def analyze(records: Sequence[QuestionRecord], traffic: TrafficSeries | None = None,
            config: PipelineConfig | None = None, load_rejected: int = 0) -> GraReport:
    """Run everything after loading on in-memory records."""
    config = config or PipelineConfig()
    with gc_paused():
        return _analyze(records, traffic, config, load_rejected)


def _analyze(records, traffic, config, load_rejected) -> GraReport:
    stop, wh = run_stage("extract", lambda: (config.stopwords(), config.wh_words()))
    features = run_stage("extract", extract_all, records, stop, wh, config.counting_mode,
                        config.overlap_mode, config.workers)
    kept, kept_fv, clean = run_stage("clean", clean_records, records, features, config.cleaning)
    buckets = run_stage("bucket", bucket_monthly, kept, kept_fv, config.cleaning.min_samples_per_month)
    series = run_stage("means", monthly_means, buckets)
    series = run_stage("groups", group_composites, series, config.groups)
    series = run_stage("control", attach_control, series, traffic)
    report = run_stage("gra", grade_series, series, config)

    report.metadata.update({
        "records_in": len(records) + load_rejected,
        "records_rejected_at_load": load_rejected,
        "records_kept": clean.records_out,
        "anonymous_dropped": clean.anonymous_dropped,
        "outliers_removed_by_feature": {k: v for k, v in clean.removed_by_feature.items()},
        "low_sample_months": buckets.low_sample,
    })
    return report


def run_pipeline(records_path: str | os.PathLike, traffic_path: str | os.PathLike | None = None,
                 config: PipelineConfig | None = None) -> GraReport:
    records, load_report = run_stage("load", load_records, records_path)
    traffic = run_stage("load", load_traffic, traffic_path) if traffic_path is not None else None
    return analyze(records, traffic, config, load_rejected=load_report.n_rejected)
