import pytest

from qqgra.config import (
    DEFAULT_GROUPS,
    OUTLIER_ELIGIBLE,
    CleaningRules,
    GroupSpec,
    PipelineConfig,
    config_from_mapping,
    load_config,
    read_flat_config,
)
from qqgra.errors import ConfigError
from qqgra.features import FEATURE_NAMES, CountingMode, OverlapMode
from qqgra.gra import Direction


def test_defaults():
    cfg = PipelineConfig()
    assert cfg.gra.delta == 0.5
    assert cfg.counting_mode is CountingMode.CHARACTERS
    assert cfg.cleaning.sigma == 3 and cfg.cleaning.min_samples_per_month == 2000
    assert cfg.cleaning.drop_anonymous and cfg.cleaning.sd_ddof == 0


def test_outlier_eligible_excludes_ratios_and_badge():
    assert set(OUTLIER_ELIGIBLE) == set(FEATURE_NAMES) - {
        "qa_length_ratio", "nonstop_overlap_ratio", "wh_type_word_ratio", "badge_indicator"}


def test_default_groups_partition_features():
    members = [f for m in DEFAULT_GROUPS.values() for f in m]
    assert sorted(members) == sorted(FEATURE_NAMES)
    assert len(DEFAULT_GROUPS) == 5


def test_group_spec_rejects_overlap():
    with pytest.raises(ConfigError):
        GroupSpec({"a": ("url_count",), "b": ("url_count",)})


def test_flat_file_parsing():
    text = """
    # comment line
    delta = 0.4
    counting_mode = whitespace_tokens   # trailing comment
    group.Question difficulty = best_answer_latency_days
    """
    values = read_flat_config(text)
    assert values == {"delta": "0.4", "counting_mode": "whitespace_tokens",
                      "group.Question difficulty": "best_answer_latency_days"}


def test_full_config_file(tmp_path):
    (tmp_path / "lex").mkdir()
    (tmp_path / "lex" / "stop.txt").write_text("the\n", encoding="utf-8")
    conf = tmp_path / "gra.conf"
    conf.write_text(
        "delta = 0.3\n"
        "sigma = 2.5\n"
        "min_samples_per_month = 10\n"
        "drop_anonymous = no\n"
        "overlap_mode = literal\n"
        "stopwords_path = lex/stop.txt\n"
        "direction.best_answer_latency_days = lower_better\n"
        "synth.seed = 9\n",
        encoding="utf-8",
    )
    cfg = load_config(conf)
    assert cfg.gra.delta == 0.3
    assert cfg.cleaning == CleaningRules(sigma=2.5, min_samples_per_month=10, drop_anonymous=False)
    assert cfg.overlap_mode is OverlapMode.LITERAL
    assert cfg.stopwords().entries == {"the"}
    assert cfg.directions == {"best_answer_latency_days": Direction.LOWER_BETTER}


def test_group_override_moves_feature():
    cfg = config_from_mapping({"group.Links": "url_count"})
    groups = cfg.groups.groups
    assert groups["Links"] == ("url_count",)
    assert "url_count" not in groups["Textual Features"]
    assert cfg.groups.group_of("url_count") == "Links"


@pytest.mark.parametrize("values", [
    {"delta": "0"}, {"delta": "abc"}, {"sigma": "-1"}, {"counting_mode": "words"},
    {"drop_anonymous": "maybe"}, {"direction.nope": "lower_better"},
    {"direction.url_count": "sideways"}, {"colour": "blue"}, {"workers": "0"},
    {"thresholds": "0.5,0.6,0.7,0.8"},
])
def test_bad_values(values):
    with pytest.raises(ConfigError):
        config_from_mapping(values)


def test_malformed_file(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("delta 0.5\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(conf)


def test_echo_omits_workers():
    a = PipelineConfig(workers=1).echo()
    b = PipelineConfig(workers=8).echo()
    assert a == b and "workers" not in a
