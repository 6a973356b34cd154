"""Seeded synthetic question corpora with planted feature -> pageview couplings.

Each record gets one standard-normal latent score per feature. Feature values
are the latent pushed through a marginal: log-normal when the target SD
exceeds the mean (heavy-tailed counts), normal otherwise, a threshold for the
badge flag, then clipped to ``[min, max]``. Pageviews are the same kind of
transform applied to

    signal = sum_j weight_j * latent_j  +  N(0, noise_sd)

after rescaling to unit variance, so pageviews are monotone in the signal and
keep their own (heavy-tailed) marginal. Records are materialised as real text
so the feature extractor sees titles, bodies, links and answers of the
planned sizes.

All randomness comes from one ``numpy.random.Generator(PCG64(seed))`` stream
consumed in a fixed order; identical specs give identical corpora.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy import stats

from .config import read_flat_config
from .errors import FeatureMismatch, InvalidSpec
from .features import FEATURE_NAMES, default_stopwords, default_wh_words
from .records import Answer, QuestionRecord, Questioner, TrafficSeries
from .report import GraReport


@dataclass(frozen=True)
class Marginal:
    mean: float
    sd: float
    min: float
    max: float


# Descriptive statistics of the crawled corpus (mean, sd, min, max).
DEFAULT_MARGINALS: dict[str, Marginal] = {
    "pageviews": Marginal(4370.92, 60879.78, 1, 4995891),
    "follower_count": Marginal(6.96, 41.41, 0, 2103),
    "comment_count": Marginal(0.10, 0.69, 0, 20),
    "answer_count": Marginal(3.05, 10.70, 0, 299),
    "questioner_follower_count": Marginal(230.06, 17102.48, 0, 3316528),
    "questioner_answer_count": Marginal(22.68, 91.12, 0, 2177),
    "endorsement_voteup": Marginal(341.20, 3971.63, 0, 229601),
    "endorsement_thanks": Marginal(49.25, 551.47, 0, 25815),
    "badge_indicator": Marginal(0.01, 0.07, 0, 1),
    "question_title_length": Marginal(21.47, 11.04, 3, 51),
    "url_count": Marginal(0.43, 1.61, 0, 48),
    "question_detail_length": Marginal(124.36, 316.29, 0, 8862),
    "qa_length_ratio": Marginal(1.64, 10.25, 0, 874),
    "nonstop_overlap_ratio": Marginal(0.03, 0.05, 0, 1),
    "best_answer_latency_days": Marginal(52.75, 162.68, 0, 1346.91),
}

# wh ratio has no usable marginal; it follows from the generated titles.
LATENT_FEATURES = tuple(f for f in FEATURE_NAMES if f != "wh_type_word_ratio")
INTEGER_FEATURES = frozenset({
    "follower_count", "comment_count", "answer_count", "questioner_follower_count",
    "questioner_answer_count", "endorsement_voteup", "endorsement_thanks", "badge_indicator",
    "question_title_length", "url_count", "question_detail_length",
})

_WH_PREFIXES = ("为什么", "如何", "怎么")
_URL_LEN = 19  # "https://t.cn/" + 6 chars
_NON_TOKEN = str.maketrans("", "", " \n:/.")


@dataclass(frozen=True)
class SynthSpec:
    months: int = 24
    records_per_month: int = 500
    seed: int = 0
    marginals: Mapping[str, Marginal] = field(default_factory=lambda: dict(DEFAULT_MARGINALS))
    planted_weights: Mapping[str, float] = field(default_factory=lambda: {"follower_count": 1.0})
    noise_sd: float = 0.0
    unanswered_fraction: float = 0.2
    wh_title_fraction: float = 0.1
    anonymous_fraction: float = 0.0
    start_month: str = "2017-01"
    max_answer_length: int = 400

    def __post_init__(self):
        if self.months < 2:
            raise InvalidSpec("months must be >= 2")
        if self.records_per_month < 1:
            raise InvalidSpec("records_per_month must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise InvalidSpec("seed must be an unsigned 64-bit integer")
        missing = [f for f in ("pageviews",) + LATENT_FEATURES if f not in self.marginals]
        if missing:
            raise InvalidSpec(f"marginals missing for: {', '.join(missing)}")
        for name, m in self.marginals.items():
            if not (m.min <= m.mean <= m.max):
                raise InvalidSpec(f"marginal {name}: need min <= mean <= max")
            if m.sd < 0:
                raise InvalidSpec(f"marginal {name}: sd must be >= 0")
            if m.sd > m.mean and m.mean <= 0:
                raise InvalidSpec(f"marginal {name}: heavy-tailed marginal needs mean > 0")
        for name, w in self.planted_weights.items():
            if name not in LATENT_FEATURES:
                raise InvalidSpec(f"planted weight on unknown or non-latent feature {name!r}")
            if w < 0 or not math.isfinite(w):
                raise InvalidSpec(f"planted weight on {name} must be a nonnegative number")
        if not any(w > 0 for w in self.planted_weights.values()):
            raise InvalidSpec("planted weights must not all be zero")
        if self.noise_sd < 0:
            raise InvalidSpec("noise_sd must be >= 0")
        for name in ("unanswered_fraction", "wh_title_fraction", "anonymous_fraction"):
            v = getattr(self, name)
            if not (0 <= v < 1):
                raise InvalidSpec(f"{name} must lie in [0, 1)")
        try:
            _month_start(self.start_month)
        except ValueError:
            raise InvalidSpec(f"start_month {self.start_month!r} is not YYYY-MM") from None
        if self.max_answer_length < 1:
            raise InvalidSpec("max_answer_length must be >= 1")

    @property
    def n_records(self) -> int:
        return self.months * self.records_per_month

    @property
    def signal_sd(self) -> float:
        return math.sqrt(sum(w * w for w in self.planted_weights.values()))


def _month_start(ym: str, offset: int = 0) -> datetime:
    y, m = (int(p) for p in ym.split("-"))
    if not 1 <= m <= 12:
        raise ValueError(ym)
    idx = y * 12 + (m - 1) + offset
    return datetime(idx // 12, idx % 12 + 1, 1, tzinfo=timezone.utc)


def _transform(name: str, latent: np.ndarray, m: Marginal, u: np.ndarray | None = None) -> np.ndarray:
    """Map standard-normal latents onto a clipped marginal.

    Integer features are rounded stochastically with the uniforms ``u``
    (``floor(x + u)``), which keeps small means such as 0.1 comments intact
    where plain rounding would push most mass to zero.
    """
    if name == "badge_indicator":
        # P(badge) = mean
        cut = stats.norm.isf(m.mean) if m.mean > 0 else np.inf
        x = (latent > cut).astype(float)
    elif m.sd > m.mean:
        s2 = math.log1p((m.sd / m.mean) ** 2)
        x = np.exp(math.log(m.mean) - s2 / 2 + math.sqrt(s2) * latent)
    else:
        x = m.mean + m.sd * latent
    if name in INTEGER_FEATURES and name != "badge_indicator":
        x = np.floor(x + u) if u is not None else np.rint(x)
    elif name == "pageviews":
        x = np.rint(x)
    return np.clip(x, m.min, m.max)


def _alphabet(lo: int, hi: int, banned: set[str]) -> np.ndarray:
    return np.array([c for c in range(lo, hi) if chr(c) not in banned], dtype=np.uint32)


def _text_pool(rng: np.random.Generator, alphabet: np.ndarray, n: int) -> str:
    if n == 0:
        return ""
    codes = alphabet[rng.integers(0, len(alphabet), size=n)]
    return codes.astype("<u4").tobytes().decode("utf-32-le")


def gen_corpus(spec: SynthSpec) -> list[QuestionRecord]:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    N = spec.n_records
    F = len(LATENT_FEATURES)

    latent = rng.standard_normal((N, F))
    jitter = rng.random((N, F))
    values = {f: _transform(f, latent[:, j], spec.marginals[f], jitter[:, j])
              for j, f in enumerate(LATENT_FEATURES)}

    w = np.array([spec.planted_weights.get(f, 0.0) for f in LATENT_FEATURES])
    noise = rng.standard_normal(N) * spec.noise_sd
    total_sd = math.sqrt(spec.signal_sd ** 2 + spec.noise_sd ** 2)
    pv_latent = (latent @ w + noise) / total_sd
    pageviews = np.maximum(_transform("pageviews", pv_latent, spec.marginals["pageviews"]), 1)

    unanswered = np.zeros(N, dtype=bool)
    n_unanswered = int(math.floor(spec.unanswered_fraction * N + 0.5))
    unanswered[rng.permutation(N)[:n_unanswered]] = True
    anonymous = rng.random(N) < spec.anonymous_fraction
    wh_title = rng.random(N) < spec.wh_title_fraction
    wh_pick = rng.integers(0, len(_WH_PREFIXES), size=N)
    month_idx = np.repeat(np.arange(spec.months), spec.records_per_month)
    month_frac = rng.random(N)
    badge_counts = rng.integers(1, 4, size=N)

    banned = set("".join(default_stopwords().entries) + "".join(default_wh_words().entries))
    q_alpha = _alphabet(0x4E00, 0x6300, banned)
    a_alpha = _alphabet(0x6300, 0x9FA0, banned)
    url_alpha = np.array([ord(c) for c in "abcdefghijklmnopqrstuvwxyz0123456789"], dtype=np.uint32)

    title_len = values["question_title_length"].astype(int)
    urls = values["url_count"].astype(int)
    detail_len = values["question_detail_length"].astype(int)
    # Pools of random characters, sliced per record to avoid per-char work.
    title_pool = _text_pool(rng, q_alpha, int(title_len.sum()))
    detail_pool = _text_pool(rng, q_alpha, int(detail_len.sum()))
    url_pool = _text_pool(rng, url_alpha, int(urls.sum()) * 6)
    filler_pool = _text_pool(rng, a_alpha, N * spec.max_answer_length)
    extra_votes = rng.integers(0, 50, size=N)

    records = []
    tp = dp = up = fp = 0
    months_start = [_month_start(spec.start_month, k) for k in range(spec.months + 1)]
    for i in range(N):
        # title
        L = int(title_len[i])
        title = title_pool[tp:tp + L]
        tp += L
        if wh_title[i]:
            prefix = _WH_PREFIXES[wh_pick[i]]
            if L > len(prefix):
                title = prefix + title[len(prefix):]

        # detail: random text with links spliced in, space-delimited
        L = int(detail_len[i])
        body = detail_pool[dp:dp + L]
        dp += L
        n_url = int(urls[i])
        if n_url:
            links = []
            for _ in range(n_url):
                links.append("https://t.cn/" + url_pool[up:up + 6])
                up += 6
            keep = max(0, L - n_url * (_URL_LEN + 1))
            pieces = [body[:keep]] + links
            detail = " ".join(p for p in pieces if p)
        else:
            detail = body

        k = int(month_idx[i])
        start, end = months_start[k], months_start[k + 1]
        created = start + timedelta(seconds=int(month_frac[i] * (end - start).total_seconds()))

        answers: tuple[Answer, ...] = ()
        if not unanswered[i]:
            n_ans = max(1, int(values["answer_count"][i]))
            qtext = title + "\n" + detail if detail else title
            qlen = len(title) + len(detail)
            ratio = float(values["qa_length_ratio"][i])
            a_len = spec.max_answer_length if ratio <= 0 else int(round(qlen / ratio))
            a_len = min(max(a_len, 1), spec.max_answer_length)
            # question tokens: everything but blanks and URL punctuation
            stripped = qtext.translate(_NON_TOKEN)
            n_overlap = int(round(float(values["nonstop_overlap_ratio"][i]) * len(stripped)))
            shared = "".join(list(dict.fromkeys(stripped))[:n_overlap]) if n_overlap else ""
            content = shared + filler_pool[fp:fp + max(0, a_len - len(shared))]
            fp += spec.max_answer_length
            best_votes = 1 + int(extra_votes[i])
            latency = timedelta(seconds=int(round(float(values["best_answer_latency_days"][i]) * 86400)))
            best = Answer(created + latency, content, best_votes)
            others = [
                Answer(created + timedelta(seconds=3600 * (j + 1)), _filler_answer(j), j % best_votes)
                for j in range(n_ans - 1)
            ]
            # best answer sits in the middle of the list; order must not matter
            pos = (i * 7919) % n_ans
            answers = tuple(others[:pos] + [best] + others[pos:])
        else:
            fp += spec.max_answer_length

        badge = int(values["badge_indicator"][i])
        records.append(QuestionRecord(
            qid=66080000 + i,
            created_at=created,
            title=title,
            detail=detail,
            pageviews=int(pageviews[i]),
            follower_count=int(values["follower_count"][i]),
            comment_count=int(values["comment_count"][i]),
            answers=answers,
            questioner=Questioner(
                follower_count=int(values["questioner_follower_count"][i]),
                answer_count=int(values["questioner_answer_count"][i]),
                voteup_received=int(values["endorsement_voteup"][i]),
                thanks_received=int(values["endorsement_thanks"][i]),
                badge_count=badge * int(badge_counts[i]),
                anonymous=bool(anonymous[i]),
            ),
        ))
    return records


def _filler_answer(j: int) -> str:
    # short filler for non-best answers
    return chr(0x7000 + j % 256) * (1 + j % 5)


def gen_traffic(spec: SynthSpec, base_visits: int = 200_000_000, growth: float = 0.01,
                jitter: float = 0.05) -> TrafficSeries:
    """Monthly platform visits for each month of ``spec``: slow growth times
    lognormal jitter, drawn from a stream independent of the corpus."""
    rng = np.random.Generator(np.random.PCG64([spec.seed, 1]))
    k = np.arange(spec.months)
    visits = base_visits * (1 + growth) ** k * np.exp(jitter * rng.standard_normal(spec.months))
    months = [_month_start(spec.start_month, i).strftime("%Y-%m") for i in range(spec.months)]
    return TrafficSeries(tuple((m, int(round(v))) for m, v in zip(months, visits)))


# --- recovery metrics ------------------------------------------------------------

@dataclass(frozen=True)
class RecoveryMetrics:
    planted_feature: str
    planted_rank: int | None
    rank_correlation: float | None


def evaluate_recovery(report: GraReport, spec: SynthSpec) -> RecoveryMetrics:
    """How well the report's feature ranking recovers the planted weights.

    ``rank_correlation`` is Spearman's rho between planted weights and grades
    over the nonzero-weight features. It is ``None`` when the weights are all
    equal (no order to recover) and 1.0 when only one feature is weighted.
    """
    reported = set(report.features) | set(report.metadata.get("degenerate_features", []))
    unknown = reported - set(FEATURE_NAMES)
    if unknown:
        raise FeatureMismatch(f"report has features the generator does not produce: {sorted(unknown)}")
    absent = [f for f in spec.planted_weights if f not in reported]
    if absent:
        raise FeatureMismatch(f"planted features missing from report: {absent}")

    weights = {f: w for f, w in spec.planted_weights.items() if w > 0}
    top = max(LATENT_FEATURES, key=lambda f: (weights.get(f, 0.0), -LATENT_FEATURES.index(f)))
    graded = [f for f in weights if f in report.features]
    top_rank = report.rank_of(top) if top in report.features else None

    if len(weights) == 1:
        rho = 1.0 if graded else None
    elif len(set(weights.values())) == 1 or len(graded) < 2:
        rho = None
    else:
        res = stats.spearmanr([weights[f] for f in graded], [report.grade_of(f) for f in graded])
        rho = None if np.isnan(res.statistic) else float(res.statistic)
    return RecoveryMetrics(top, top_rank, rho)


# --- spec files -------------------------------------------------------------------

def spec_from_mapping(values: Mapping[str, str]) -> SynthSpec:
    kw: dict = {}
    weights: dict[str, float] = {}
    marginals = dict(DEFAULT_MARGINALS)
    casts = {
        "months": int, "records_per_month": int, "seed": int, "noise_sd": float,
        "unanswered_fraction": float, "wh_title_fraction": float,
        "anonymous_fraction": float, "start_month": str, "max_answer_length": int,
    }
    for key, value in values.items():
        if not key.startswith("synth."):
            continue
        k = key[len("synth."):]
        try:
            if k in casts:
                kw[k] = casts[k](value)
            elif k.startswith("weight."):
                weights[k[len("weight."):]] = float(value)
            elif k.startswith("marginal."):
                parts = [float(p) for p in value.split(",")]
                if len(parts) != 4:
                    raise InvalidSpec(f"{key}: expected mean,sd,min,max")
                marginals[k[len("marginal."):]] = Marginal(*parts)
            else:
                raise InvalidSpec(f"unknown synth key {key!r}")
        except ValueError:
            raise InvalidSpec(f"{key}: bad value {value!r}") from None
    if weights:
        kw["planted_weights"] = weights
    kw["marginals"] = marginals
    return SynthSpec(**kw)


def load_spec(path: str | os.PathLike | None) -> SynthSpec:
    if path is None:
        return SynthSpec()
    p = Path(path)
    return spec_from_mapping(read_flat_config(p.read_text(encoding="utf-8"), str(p)))
