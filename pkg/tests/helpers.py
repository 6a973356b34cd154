"""Builders and published fixture values shared by the tests."""

from datetime import datetime, timedelta, timezone

from qqgra.features import FEATURE_NAMES, FeatureVector
from qqgra.records import Answer, QuestionRecord, Questioner

T0 = datetime(2017, 1, 5, 12, 0, tzinfo=timezone.utc)

# Reference grades for the 15 features, highest first.
REFERENCE_GRADES = [
    ("follower_count", 0.970055),
    ("comment_count", 0.96664),
    ("answer_count", 0.957914),
    ("endorsement_voteup", 0.957771),
    ("questioner_answer_count", 0.955894),
    ("endorsement_thanks", 0.954294),
    ("questioner_follower_count", 0.936614),
    ("question_title_length", 0.934529),
    ("badge_indicator", 0.933669),
    ("url_count", 0.931183),
    ("question_detail_length", 0.930063),
    ("best_answer_latency_days", 0.929469),
    ("qa_length_ratio", 0.921683),
    ("nonstop_overlap_ratio", 0.920797),
    ("wh_type_word_ratio", 0.902555),
]

# Reference grades for the five feature groups, highest first.
REFERENCE_GROUP_GRADES = [
    ("Digital popularity", 0.946191),
    ("Questioner reputation", 0.926154),
    ("Questioner popularity", 0.916521),
    ("Textual Features", 0.910642),
    ("Question difficulty", 0.857626),
]


def make_record(qid=1, created=T0, title="为什么天空是蓝色", detail="", pageviews=10,
                follower_count=0, comment_count=0, answers=(), anonymous=False,
                badge_count=0, q_followers=0, q_answers=0, voteup=0, thanks=0):
    """A QuestionRecord with sensible defaults. ``answers`` holds
    (hours_after_question, content, votes) triples."""
    ans = tuple(Answer(created + timedelta(hours=h), c, v) for h, c, v in answers)
    return QuestionRecord(
        qid=qid, created_at=created, title=title, detail=detail, pageviews=pageviews,
        follower_count=follower_count, comment_count=comment_count, answers=ans,
        questioner=Questioner(q_followers, q_answers, voteup, thanks, badge_count, anonymous),
    )


def make_fv(**overrides):
    """FeatureVector with every field 0 (ratios 0.0) unless overridden."""
    base = {f: 0 for f in FEATURE_NAMES}
    base.update(best_answer_latency_days=0.0, qa_length_ratio=0.0,
                nonstop_overlap_ratio=0.0, wh_type_word_ratio=0.0)
    base.update(overrides)
    return FeatureVector(**base)


def reference_report():
    """A GraReport carrying the reference feature and group grades."""
    from qqgra.config import GroupSpec
    from qqgra.gra import classify_influence
    from qqgra.report import FeatureRow, GraReport, GroupRow

    groups = GroupSpec()
    rows = tuple(FeatureRow(i, f, g, classify_influence(g), groups.group_of(f))
                 for i, (f, g) in enumerate(REFERENCE_GRADES, start=1))
    grows = tuple(GroupRow(i, name, g, classify_influence(g)) for i, (name, g) in enumerate(REFERENCE_GROUP_GRADES, start=1))
    return GraReport(rows, grows, metadata={"delta": 0.5})
