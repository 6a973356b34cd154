"""The 15-feature question-quality scale.

Social features are copied from the record (question counters, questioner
profile); textual features are computed from the title, the detail body and
the best answer. Answer-dependent features are ``None`` when the question has
no answers.

Text lengths are measured in grapheme clusters, so a CJK character, an
accented letter or an emoji sequence each count once.
"""

from __future__ import annotations

import enum
import functools
import operator
import os
from dataclasses import dataclass, fields
from importlib import resources
from typing import Iterable, Optional

import regex

from .errors import EmptyText, EmptyTitle, LexiconError, NegativeLatency, ZeroLengthAnswer
from .records import Answer, QuestionRecord

# Canonical feature order. Report labels below.
FEATURE_NAMES = (
    "follower_count",
    "comment_count",
    "answer_count",
    "best_answer_latency_days",
    "questioner_follower_count",
    "endorsement_thanks",
    "endorsement_voteup",
    "badge_indicator",
    "questioner_answer_count",
    "question_title_length",
    "question_detail_length",
    "url_count",
    "qa_length_ratio",
    "nonstop_overlap_ratio",
    "wh_type_word_ratio",
)

FEATURE_LABELS = {
    "follower_count": "Follower count",
    "comment_count": "Comment count",
    "answer_count": "Answer count",
    "best_answer_latency_days": "Best answer received time (Days)",
    "questioner_follower_count": "Questioner follower count",
    "endorsement_thanks": "User endorsement (thanks)",
    "endorsement_voteup": "User endorsement (vote up)",
    "badge_indicator": "Badge",
    "questioner_answer_count": "Questioner answer count",
    "question_title_length": "Title length",
    "question_detail_length": "Question detail length",
    "url_count": "URL count",
    "qa_length_ratio": "Question and best answer length ratio",
    "nonstop_overlap_ratio": "Nonstop word ratio",
    "wh_type_word_ratio": "Wh-type word ratio",
}

# Features bounded to [0, 1] (or a 0/1 flag); everything else is a count,
# length or duration.
RATIO_FEATURES = frozenset({"qa_length_ratio", "nonstop_overlap_ratio", "wh_type_word_ratio"})
FLAG_FEATURES = frozenset({"badge_indicator"})
ANSWER_DEPENDENT = frozenset({"best_answer_latency_days", "qa_length_ratio", "nonstop_overlap_ratio"})


def feature_label(name: str) -> str:
    return FEATURE_LABELS.get(name, name)


class CountingMode(enum.Enum):
    CHARACTERS = "characters"
    WHITESPACE_TOKENS = "whitespace_tokens"


class OverlapMode(enum.Enum):
    # distinct non-stop question tokens also found in the best answer
    OVERLAP = "overlap"
    # non-stop question tokens, no reference to the answer
    LITERAL = "literal"


@dataclass(frozen=True)
class FeatureVector:
    follower_count: int
    comment_count: int
    answer_count: int
    best_answer_latency_days: Optional[float]
    questioner_follower_count: int
    endorsement_thanks: int
    endorsement_voteup: int
    badge_indicator: int
    questioner_answer_count: int
    question_title_length: int
    question_detail_length: int
    url_count: int
    qa_length_ratio: Optional[float]
    nonstop_overlap_ratio: Optional[float]
    wh_type_word_ratio: float

    def as_dict(self) -> dict:
        return dict(zip(_FV_FIELDS, _FV_GETTER(self)))

    def as_tuple(self) -> tuple:
        """Values in field order, so ``FeatureVector(*fv.as_tuple()) == fv``."""
        return _FV_GETTER(self)


_FV_FIELDS = tuple(f.name for f in fields(FeatureVector))
_FV_GETTER = operator.attrgetter(*_FV_FIELDS)


# --- lexicons ------------------------------------------------------------------

@dataclass(frozen=True)
class Lexicon:
    entries: frozenset[str]
    source_path: str = "<memory>"

    def __post_init__(self):
        if not self.entries:
            raise LexiconError(f"lexicon {self.source_path} is empty")
        folded = frozenset(e.casefold() for e in self.entries)
        for e in folded:
            if not e or any(c in "\r\n" for c in e):
                raise LexiconError(f"invalid lexicon entry {e!r} in {self.source_path}")
        object.__setattr__(self, "entries", folded)

    @classmethod
    def from_lines(cls, lines: Iterable[str], source_path: str = "<memory>") -> "Lexicon":
        entries = set()
        for line in lines:
            s = line.strip()
            if s and not s.startswith("#"):
                entries.add(s)
        return cls(frozenset(entries), source_path)

    @functools.cached_property
    def _by_first(self) -> dict[str, list[tuple[str, ...]]]:
        # first grapheme -> entries as grapheme tuples, longest first
        index: dict[str, list[tuple[str, ...]]] = {}
        for e in self.entries:
            g = tuple(graphemes(e))
            index.setdefault(g[0], []).append(g)
        for v in index.values():
            v.sort(key=len, reverse=True)
        return index

    @functools.cached_property
    def chars(self) -> frozenset[str]:
        # every code point that occurs in some entry
        return frozenset("".join(self.entries))

    @functools.cached_property
    def pattern(self) -> regex.Pattern:
        # alternation tried longest-first == greedy longest match
        alts = sorted(self.entries, key=lambda e: (-len(e), e))
        return regex.compile("|".join(regex.escape(e) for e in alts))

    def cover(self, units: list[str]) -> list[bool]:
        """Mark grapheme positions covered by entries, greedy longest match
        scanning left to right. ``units`` must already be case-folded."""
        covered = [False] * len(units)
        index = self._by_first
        resume = 0
        for i, u in enumerate(units):
            if i < resume or u not in index:
                continue
            for cand in index[u]:
                L = len(cand)
                if tuple(units[i:i + L]) == cand:
                    covered[i:i + L] = [True] * L
                    resume = i + L
                    break
        return covered


def load_lexicon(path: str | os.PathLike) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return Lexicon.from_lines(fh, os.fspath(path))


@functools.lru_cache(maxsize=None)
def _bundled(name: str) -> Lexicon:
    text = resources.files("qqgra").joinpath("data", name).read_text(encoding="utf-8")
    return Lexicon.from_lines(text.splitlines(), f"<bundled {name}>")


def default_stopwords() -> Lexicon:
    return _bundled("stopwords.txt")


def default_wh_words() -> Lexicon:
    return _bundled("wh_words.txt")


# --- text primitives -----------------------------------------------------------

_GRAPHEME = regex.compile(r"\X")
# Any char that can join a neighbour into a multi-codepoint cluster.
_CLUSTERING = regex.compile(r"[^\p{Grapheme_Cluster_Break=Other}\n]")
_EDGE_PUNCT = regex.compile(r"^\p{P}+|\p{P}+$")
_BLANK_PUNCT = regex.compile(r"[\s\p{P}]+")
_URL = regex.compile(r"https?://\S+", regex.IGNORECASE)


def graphemes(text: str) -> list[str]:
    if _CLUSTERING.search(text) is None:
        return list(text)
    return _GRAPHEME.findall(text)


def count_graphemes(text: str) -> int:
    if _CLUSTERING.search(text) is None:
        return len(text)
    return len(_GRAPHEME.findall(text))


@functools.lru_cache(maxsize=65536)
def _is_blank_or_punct(g: str) -> bool:
    return _BLANK_PUNCT.fullmatch(g) is not None


def _word_tokens(text: str) -> list[str]:
    """Whitespace tokens, edge punctuation stripped, case-folded; empties dropped."""
    out = []
    for tok in text.split():
        t = _EDGE_PUNCT.sub("", tok).casefold()
        if t:
            out.append(t)
    return out


def _char_nonstop(text: str, stopwords: Lexicon) -> tuple[int, list[str]]:
    """Token count of ``text`` in character mode, and its non-stop tokens.

    Tokens are case-folded graphemes that are not whitespace or punctuation.
    """
    folded = text.casefold()
    if _CLUSTERING.search(folded) is None:
        n = len(_BLANK_PUNCT.sub("", folded))
        return n, list(_BLANK_PUNCT.sub("", stopwords.pattern.sub("", folded)))
    return _char_nonstop_units(folded, stopwords)


def _char_nonstop_units(folded: str, stopwords: Lexicon) -> tuple[int, list[str]]:
    # grapheme-by-grapheme path for text with combining sequences
    units = _GRAPHEME.findall(folded)
    stop = stopwords.cover(units)
    tokens = [(g, s) for g, s in zip(units, stop) if not _is_blank_or_punct(g)]
    return len(tokens), [g for g, s in tokens if not s]


def _char_hits(tokens: set[str], text: str) -> int:
    """How many of ``tokens`` occur as a grapheme of ``text`` (case-folded)."""
    folded = text.casefold()
    if _CLUSTERING.search(folded) is None:
        # every code point is its own grapheme, so substring search is exact
        return len(tokens.intersection(folded))
    return len(tokens.intersection(_GRAPHEME.findall(folded)))


# --- textual features ----------------------------------------------------------

def title_length(title: str, mode: CountingMode = CountingMode.CHARACTERS) -> int:
    if not title or not title.strip():
        raise EmptyTitle("question title is empty")
    if mode is CountingMode.WHITESPACE_TOKENS:
        return len(title.split())
    return count_graphemes(title)


def detail_length(detail: str) -> int:
    return count_graphemes(detail)


def url_count(text: str) -> int:
    return len(_URL.findall(text))


def wh_ratio(title: str, wh_words: Lexicon, mode: CountingMode = CountingMode.CHARACTERS) -> float:
    """Share of the title made up of interrogative words, in ``mode`` units."""
    total = title_length(title, mode)
    if mode is CountingMode.WHITESPACE_TOKENS:
        hits = sum(1 for tok in title.split()
                   if _EDGE_PUNCT.sub("", tok).casefold() in wh_words.entries)
    else:
        folded = title.casefold()
        if len(folded) == len(title) and _CLUSTERING.search(folded) is None:
            hits = sum(m.end() - m.start() for m in wh_words.pattern.finditer(folded))
        else:
            # fold per grapheme so hits and total count the same units
            hits = sum(wh_words.cover([g.casefold() for g in graphemes(title)]))
    return hits / total


def nonstop_overlap_ratio(question_text: str, best_answer_text: str, stopwords: Lexicon,
                          mode: CountingMode = CountingMode.CHARACTERS,
                          overlap_mode: OverlapMode = OverlapMode.OVERLAP) -> float:
    """Distinct non-stop question tokens that also occur in the answer, over
    the question's token count.

    With ``OverlapMode.LITERAL`` the numerator is simply the number of
    non-stop question tokens and the answer is not consulted.
    """
    if not question_text or not best_answer_text:
        raise EmptyText("question and best-answer text must be non-empty")
    if mode is CountingMode.CHARACTERS and overlap_mode is OverlapMode.OVERLAP:
        quick = _char_overlap_quick(question_text.casefold(), best_answer_text.casefold(), stopwords)
        if quick is not None:
            return quick
    if mode is CountingMode.WHITESPACE_TOKENS:
        q = _word_tokens(question_text)
        n_tokens = len(q)
        q_nonstop = [t for t in q if t not in stopwords.entries]
    else:
        n_tokens, q_nonstop = _char_nonstop(question_text, stopwords)
    if not n_tokens:
        raise EmptyText("question text has no tokens")
    if overlap_mode is OverlapMode.LITERAL:
        return len(q_nonstop) / n_tokens
    if mode is CountingMode.WHITESPACE_TOKENS:
        return len(set(q_nonstop).intersection(_word_tokens(best_answer_text))) / n_tokens
    # q_nonstop never holds blanks or punctuation, so no need to filter
    return _char_hits(set(q_nonstop), best_answer_text) / n_tokens


def _char_overlap_quick(q: str, a: str, stopwords: Lexicon) -> float | None:
    """Character-mode overlap without materialising the non-stop tokens.

    Applies when neither text has multi-codepoint graphemes and no grapheme
    the two texts share occurs inside a stopword entry: such a grapheme can
    never be covered by a stopword match, so every shared non-blank one
    counts. Returns None when the full computation is needed.
    """
    if _CLUSTERING.search(q) is not None or _CLUSTERING.search(a) is not None:
        return None
    shared = set(q).intersection(a)
    if not stopwords.chars.isdisjoint(shared):
        return None
    n_tokens = len(_BLANK_PUNCT.sub("", q))
    if not n_tokens:
        raise EmptyText("question text has no tokens")
    return sum(1 for c in shared if not _is_blank_or_punct(c)) / n_tokens


def qa_length_ratio(question_length: int, best_answer_length: int | None) -> float | None:
    if best_answer_length is None:
        return None
    if best_answer_length == 0:
        raise ZeroLengthAnswer("best answer has zero length")
    return question_length / best_answer_length


# --- answer-dependent features -------------------------------------------------

def best_answer(record: QuestionRecord) -> Answer | None:
    """Most up-voted answer; ties go to the earliest, then to list order."""
    if not record.answers:
        return None
    best = min(range(len(record.answers)),
               key=lambda i: (-record.answers[i].voteup_count, record.answers[i].created_at, i))
    return record.answers[best]


def best_answer_latency_days(record: QuestionRecord, answer: Answer | None = None) -> float | None:
    ans = answer if answer is not None else best_answer(record)
    if ans is None:
        return None
    seconds = (ans.created_at - record.created_at).total_seconds()
    if seconds < 0:
        raise NegativeLatency(f"qid {record.qid}: best answer predates the question")
    return seconds / 86400.0


def question_text(record: QuestionRecord) -> str:
    return f"{record.title}\n{record.detail}" if record.detail else record.title


def extract_features(record: QuestionRecord,
                     stopwords: Lexicon | None = None,
                     wh_words: Lexicon | None = None,
                     mode: CountingMode = CountingMode.CHARACTERS,
                     overlap_mode: OverlapMode = OverlapMode.OVERLAP) -> FeatureVector:
    stopwords = stopwords or default_stopwords()
    wh_words = wh_words or default_wh_words()
    q = record.questioner
    ans = best_answer(record)

    qtext = question_text(record)
    tlen = title_length(record.title, mode)
    dlen = detail_length(record.detail)
    if ans is None:
        latency = ratio = overlap = None
    else:
        latency = best_answer_latency_days(record, ans)
        # the length ratio is always in characters
        qlen = (tlen if mode is CountingMode.CHARACTERS else count_graphemes(record.title)) + dlen
        ratio = qa_length_ratio(qlen, count_graphemes(ans.content))
        overlap = nonstop_overlap_ratio(qtext, ans.content, stopwords, mode, overlap_mode)

    return FeatureVector(
        follower_count=record.follower_count,
        comment_count=record.comment_count,
        answer_count=len(record.answers),
        best_answer_latency_days=latency,
        questioner_follower_count=q.follower_count,
        endorsement_thanks=q.thanks_received,
        endorsement_voteup=q.voteup_received,
        badge_indicator=1 if q.badge_count > 0 else 0,
        questioner_answer_count=q.answer_count,
        question_title_length=tlen,
        question_detail_length=dlen,
        url_count=url_count(qtext),
        qa_length_ratio=ratio,
        nonstop_overlap_ratio=overlap,
        wh_type_word_ratio=wh_ratio(record.title, wh_words, mode),
    )
