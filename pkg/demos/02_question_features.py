"""
Fifteen features from one question
==================================

Build a single question record by hand and look at what the extractor
makes of it, in character mode (the default, suited to Chinese text) and in
whitespace-token mode.
"""

from datetime import datetime, timedelta, timezone

from qqgra.features import (
    CountingMode,
    default_stopwords,
    default_wh_words,
    extract_features,
    feature_label,
    graphemes,
)
from qqgra.records import Answer, QuestionRecord, Questioner

posted = datetime(2017, 3, 2, 8, 0, tzinfo=timezone.utc)
record = QuestionRecord(
    qid=66080001,
    created_at=posted,
    title="为什么天空是蓝色",
    detail="看了 https://t.cn/abc123 还是不明白",
    pageviews=311,
    follower_count=4,
    comment_count=1,
    answers=(
        Answer(posted + timedelta(days=2), "因为瑞利散射，蓝光比红光散射得更多，所以天空看起来是蓝色的。", 12),
        Answer(posted + timedelta(hours=3), "不知道", 1),
    ),
    questioner=Questioner(follower_count=10, answer_count=3, voteup_received=40,
                          thanks_received=2, badge_count=0),
)

# %%
# Characters are counted as user-perceived characters (grapheme clusters),
# so a flag emoji or an accented letter built from two code points is one.
print(len("e\u0301"), len(graphemes("e\u0301")))

# %%
# The best answer is the most up-voted one, here the detailed answer posted
# two days later, so latency is 2.0 days.
fv = extract_features(record)
for name, value in fv.as_dict().items():
    print(f"{feature_label(name):40s} {value}")

# %%
# Token mode splits on whitespace. For unsegmented Chinese that makes the
# whole title a single token, which is why character mode is the default.
tok = extract_features(record, default_stopwords(), default_wh_words(), CountingMode.WHITESPACE_TOKENS)
print("title length (chars) ", fv.question_title_length)
print("title length (tokens)", tok.question_title_length)
