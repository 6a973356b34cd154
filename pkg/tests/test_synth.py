import dataclasses
from collections import Counter

import numpy as np
import pytest

from qqgra.errors import FeatureMismatch, InvalidSpec
from qqgra.features import FEATURE_NAMES, default_stopwords, default_wh_words
from qqgra.gra import InfluenceClass
from qqgra.pipeline import analyze, extract_all
from qqgra.records import QuestionRecord
from qqgra.report import FeatureRow, GraReport
from qqgra.synth import (
    DEFAULT_MARGINALS,
    LATENT_FEATURES,
    Marginal,
    SynthSpec,
    evaluate_recovery,
    gen_corpus,
    gen_traffic,
    load_spec,
    spec_from_mapping,
)


def test_same_spec_same_corpus():
    spec = SynthSpec(months=2, records_per_month=40, seed=17)
    assert gen_corpus(spec) == gen_corpus(spec)


def test_different_seed_different_corpus():
    a = gen_corpus(SynthSpec(months=2, records_per_month=40, seed=1))
    b = gen_corpus(SynthSpec(months=2, records_per_month=40, seed=2))
    assert a != b


def test_shape_and_months():
    recs = gen_corpus(SynthSpec(months=3, records_per_month=10, seed=0))
    assert len(recs) == 30
    assert Counter(r.month for r in recs) == {"2017-01": 10, "2017-02": 10, "2017-03": 10}
    assert len({r.qid for r in recs}) == 30


def test_unanswered_quota_exact():
    recs = gen_corpus(SynthSpec(months=2, records_per_month=50, seed=0, unanswered_fraction=0.2))
    assert sum(1 for r in recs if not r.answers) == 20


def test_records_survive_serialisation():
    recs = gen_corpus(SynthSpec(months=2, records_per_month=30, seed=5, anonymous_fraction=0.3))
    assert [QuestionRecord.from_dict(r.to_dict()) for r in recs] == recs


def test_anonymous_fraction_zero_by_default():
    recs = gen_corpus(SynthSpec(months=2, records_per_month=30, seed=5))
    assert not any(r.questioner.anonymous for r in recs)


# Mean of a heavy-tailed column is too noisy to pin at this size once the
# coefficient of variation passes 10. answer_count is biased upward because
# an answered question always carries at least one answer.
CONVERGENT = [f for f in LATENT_FEATURES
              if DEFAULT_MARGINALS[f].sd <= 10 * DEFAULT_MARGINALS[f].mean and f != "answer_count"]


def test_realised_marginals_converge():
    spec = SynthSpec(months=12, records_per_month=1000, seed=2)
    fvs = extract_all(gen_corpus(spec), default_stopwords(), default_wh_words())
    for f in CONVERGENT:
        vals = [getattr(fv, f) for fv in fvs if getattr(fv, f) is not None]
        target = DEFAULT_MARGINALS[f].mean
        assert abs(np.mean(vals) - target) <= 0.1 * target, f


def test_realised_values_respect_clip_bounds():
    fvs = extract_all(gen_corpus(SynthSpec(months=2, records_per_month=300, seed=8)),
                      default_stopwords(), default_wh_words())
    for f in LATENT_FEATURES:
        m = DEFAULT_MARGINALS[f]
        vals = [getattr(fv, f) for fv in fvs if getattr(fv, f) is not None]
        assert min(vals) >= m.min - 1e-9 and max(vals) <= m.max + 1e-9, f


def test_generated_text_realises_planned_lengths():
    spec = SynthSpec(months=2, records_per_month=50, seed=3)
    fvs = extract_all(gen_corpus(spec), default_stopwords(), default_wh_words())
    assert all(3 <= fv.question_title_length <= 51 for fv in fvs)
    assert any(fv.url_count > 0 for fv in fvs)
    assert any(fv.wh_type_word_ratio > 0 for fv in fvs)


# --- traffic ------------------------------------------------------------------------

def test_traffic_covers_spec_months():
    spec = SynthSpec(months=14, records_per_month=1, seed=3, start_month="2016-12")
    t = gen_traffic(spec)
    months = [m for m, _ in t.points]
    assert months[0] == "2016-12" and months[1] == "2017-01" and len(months) == 14
    assert all(v > 0 for _, v in t.points)
    assert gen_traffic(spec) == t


# --- recovery ------------------------------------------------------------------------

def test_noiseless_single_weight_recovered():
    spec = SynthSpec(months=6, records_per_month=300, seed=1)
    m = evaluate_recovery(analyze(gen_corpus(spec)), spec)
    assert m.planted_feature == "follower_count"
    assert m.planted_rank == 1 and m.rank_correlation == 1.0


def _report(grades):
    rows = [FeatureRow(i + 1, f, g, InfluenceClass.MARKED, None)
            for i, (f, g) in enumerate(sorted(grades.items(), key=lambda kv: -kv[1]))]
    return GraReport(tuple(rows))


def test_equal_weights_have_no_correlation():
    spec = SynthSpec(planted_weights={"url_count": 1.0, "comment_count": 1.0})
    m = evaluate_recovery(_report({"url_count": 0.95, "comment_count": 0.92, "answer_count": 0.91}), spec)
    assert m.rank_correlation is None and m.planted_feature in {"url_count", "comment_count"}


def test_correlation_follows_weight_order():
    spec = SynthSpec(planted_weights={"url_count": 3.0, "comment_count": 2.0, "answer_count": 1.0})
    m = evaluate_recovery(_report({"url_count": 0.91, "comment_count": 0.93, "answer_count": 0.95}), spec)
    assert m.rank_correlation == pytest.approx(-1.0)
    assert m.planted_rank == 3


def test_report_with_foreign_feature():
    with pytest.raises(FeatureMismatch):
        evaluate_recovery(_report({"mystery": 0.9, "follower_count": 0.8}), SynthSpec())


def test_planted_feature_absent_from_report():
    with pytest.raises(FeatureMismatch):
        evaluate_recovery(_report({"url_count": 0.9}), SynthSpec())


# --- spec validation ----------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    {"months": 1},
    {"records_per_month": 0},
    {"seed": -1},
    {"noise_sd": -0.1},
    {"unanswered_fraction": 1.0},
    {"planted_weights": {"follower_count": 0.0}},
    {"planted_weights": {"wh_type_word_ratio": 1.0}},
    {"planted_weights": {"nope": 1.0}},
    {"start_month": "2017-13"},
    {"marginals": {**DEFAULT_MARGINALS, "url_count": Marginal(5, 1, 6, 9)}},
])
def test_invalid_specs(kwargs):
    with pytest.raises(InvalidSpec):
        SynthSpec(**kwargs)


def test_marginals_must_cover_latent_features():
    partial = {k: v for k, v in DEFAULT_MARGINALS.items() if k != "url_count"}
    with pytest.raises(InvalidSpec, match="url_count"):
        SynthSpec(marginals=partial)


def test_spec_from_file(tmp_path):
    p = tmp_path / "synth.conf"
    p.write_text("synth.months = 3\nsynth.seed = 12\nsynth.noise_sd = 0.25\n"
                 "synth.weight.url_count = 2\nsynth.marginal.url_count = 1,2,0,9\n"
                 "delta = 0.5\n", encoding="utf-8")
    spec = load_spec(p)
    assert (spec.months, spec.seed, spec.noise_sd) == (3, 12, 0.25)
    assert dict(spec.planted_weights) == {"url_count": 2.0}
    assert spec.marginals["url_count"] == Marginal(1, 2, 0, 9)


@pytest.mark.parametrize("values", [{"synth.months": "many"}, {"synth.colour": "red"},
                                    {"synth.marginal.url_count": "1,2"}])
def test_bad_spec_values(values):
    with pytest.raises(InvalidSpec):
        spec_from_mapping(values)


def test_default_spec_without_file():
    assert load_spec(None) == SynthSpec()
    assert set(LATENT_FEATURES) == set(FEATURE_NAMES) - {"wh_type_word_ratio"}
    assert dataclasses.asdict(SynthSpec())["months"] == 24
