"""Run configuration and the flat ``key = value`` config file format.

Example config::

    # gra.conf
    delta = 0.5
    counting_mode = characters        # or whitespace_tokens
    sigma = 3
    min_samples_per_month = 2000
    drop_anonymous = true
    overlap_mode = overlap            # or literal
    stopwords_path = lexicons/stop.txt
    wh_words_path = lexicons/wh.txt
    direction.best_answer_latency_days = lower_better
    group.Question difficulty = best_answer_latency_days

Relative lexicon paths are resolved against the config file's directory.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import ConfigError
from .features import (
    FEATURE_NAMES,
    FLAG_FEATURES,
    RATIO_FEATURES,
    CountingMode,
    Lexicon,
    OverlapMode,
    default_stopwords,
    default_wh_words,
    load_lexicon,
)
from .gra import Direction, GraConfig

OUTLIER_ELIGIBLE = tuple(f for f in FEATURE_NAMES if f not in RATIO_FEATURES | FLAG_FEATURES)

DEFAULT_GROUPS: dict[str, tuple[str, ...]] = {
    "Digital popularity": ("follower_count", "comment_count", "answer_count"),
    "Questioner reputation": ("endorsement_voteup", "endorsement_thanks",
                              "badge_indicator", "questioner_answer_count"),
    "Questioner popularity": ("questioner_follower_count",),
    "Textual Features": ("question_title_length", "question_detail_length", "url_count",
                         "qa_length_ratio", "nonstop_overlap_ratio", "wh_type_word_ratio"),
    "Question difficulty": ("best_answer_latency_days",),
}


@dataclass(frozen=True)
class CleaningRules:
    sigma: float = 3.0
    min_samples_per_month: int = 2000
    drop_anonymous: bool = True
    outlier_eligible: tuple[str, ...] = OUTLIER_ELIGIBLE
    # 0 = population SD (divide by N), 1 = sample SD
    sd_ddof: int = 0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be > 0, got {self.sigma}")
        if self.min_samples_per_month < 1:
            raise ConfigError("min_samples_per_month must be a positive integer")
        if self.sd_ddof not in (0, 1):
            raise ConfigError("sd_ddof must be 0 or 1")


@dataclass(frozen=True)
class GroupSpec:
    groups: Mapping[str, tuple[str, ...]] = field(default_factory=lambda: dict(DEFAULT_GROUPS))

    def __post_init__(self):
        seen: dict[str, str] = {}
        for g, members in self.groups.items():
            if not members:
                raise ConfigError(f"group {g!r} has no members")
            for m in members:
                if m in seen:
                    raise ConfigError(f"feature {m!r} is in both {seen[m]!r} and {g!r}")
                seen[m] = g

    def group_of(self, feature: str) -> str | None:
        for g, members in self.groups.items():
            if feature in members:
                return g
        return None


@dataclass(frozen=True)
class PipelineConfig:
    gra: GraConfig = field(default_factory=GraConfig)
    counting_mode: CountingMode = CountingMode.CHARACTERS
    overlap_mode: OverlapMode = OverlapMode.OVERLAP
    cleaning: CleaningRules = field(default_factory=CleaningRules)
    stopwords_path: str | None = None
    wh_words_path: str | None = None
    directions: Mapping[str, Direction] = field(default_factory=dict)
    groups: GroupSpec = field(default_factory=GroupSpec)
    workers: int = 1

    def stopwords(self) -> Lexicon:
        return load_lexicon(self.stopwords_path) if self.stopwords_path else default_stopwords()

    def wh_words(self) -> Lexicon:
        return load_lexicon(self.wh_words_path) if self.wh_words_path else default_wh_words()

    def echo(self) -> dict:
        """Settings that affect results, as plain JSON-able values.

        ``workers`` is left out on purpose: it must not change the output.
        """
        return {
            "delta": self.gra.delta,
            "thresholds": list(self.gra.thresholds),
            "counting_mode": self.counting_mode.value,
            "overlap_mode": self.overlap_mode.value,
            "sigma": self.cleaning.sigma,
            "sd_ddof": self.cleaning.sd_ddof,
            "min_samples_per_month": self.cleaning.min_samples_per_month,
            "drop_anonymous": self.cleaning.drop_anonymous,
            "stopwords": self.stopwords_path or "<bundled>",
            "wh_words": self.wh_words_path or "<bundled>",
            "directions": {k: v.value for k, v in sorted(self.directions.items())},
            "groups": {g: list(m) for g, m in self.groups.groups.items()},
        }


def read_flat_config(text: str, source: str = "<string>") -> dict[str, str]:
    """Parse ``key = value`` lines (``#`` comments) into an ordered dict."""
    parser = configparser.ConfigParser(
        interpolation=None, delimiters=("=",), comment_prefixes=("#",),
        inline_comment_prefixes=("#",), strict=True,
    )
    parser.optionxform = str  # keep key case (group names)
    try:
        parser.read_string("[__root__]\n" + text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return {k.strip(): v.strip() for k, v in parser["__root__"].items()}


def _bool(key: str, value: str) -> bool:
    v = value.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def _num(key: str, value: str, kind=float):
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {value!r}") from None


def _enum(key: str, value: str, kind):
    try:
        return kind(value.lower())
    except ValueError:
        choices = ", ".join(m.value for m in kind)
        raise ConfigError(f"{key}: expected one of {choices}, got {value!r}") from None


def config_from_mapping(values: Mapping[str, str], base_dir: str | os.PathLike | None = None) -> PipelineConfig:
    base = Path(base_dir) if base_dir is not None else None
    kw: dict = {}
    gra_kw: dict = {}
    clean_kw: dict = {}
    directions: dict[str, Direction] = {}
    groups: dict[str, tuple[str, ...]] = {}

    def path(v: str) -> str:
        p = Path(v).expanduser()
        if base is not None and not p.is_absolute():
            p = base / p
        return str(p)

    for key, value in values.items():
        if key.startswith("synth."):
            continue  # generator settings may share the file
        if key == "delta":
            gra_kw["delta"] = _num(key, value)
        elif key == "thresholds":
            gra_kw["thresholds"] = tuple(_num(key, v) for v in value.split(","))
        elif key == "counting_mode":
            kw["counting_mode"] = _enum(key, value, CountingMode)
        elif key == "overlap_mode":
            kw["overlap_mode"] = _enum(key, value, OverlapMode)
        elif key == "sigma":
            clean_kw["sigma"] = _num(key, value)
        elif key == "sd_ddof":
            clean_kw["sd_ddof"] = _num(key, value, int)
        elif key == "min_samples_per_month":
            clean_kw["min_samples_per_month"] = _num(key, value, int)
        elif key == "drop_anonymous":
            clean_kw["drop_anonymous"] = _bool(key, value)
        elif key == "stopwords_path":
            kw["stopwords_path"] = path(value)
        elif key == "wh_words_path":
            kw["wh_words_path"] = path(value)
        elif key == "workers":
            kw["workers"] = _num(key, value, int)
        elif key.startswith("direction."):
            feat = key[len("direction."):]
            if feat not in FEATURE_NAMES:
                raise ConfigError(f"{key}: unknown feature {feat!r}")
            directions[feat] = _enum(key, value, Direction)
        elif key.startswith("group."):
            name = key[len("group."):].strip()
            members = tuple(m.strip() for m in value.split(",") if m.strip())
            groups[name] = members
        else:
            raise ConfigError(f"unknown config key {key!r}")

    try:
        if gra_kw:
            kw["gra"] = GraConfig(**gra_kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if clean_kw:
        kw["cleaning"] = CleaningRules(**clean_kw)
    if directions:
        kw["directions"] = directions
    if groups:
        # overrides replace same-named default groups; moved features leave
        # their old group
        merged = {g: m for g, m in DEFAULT_GROUPS.items() if g not in groups}
        moved = {f for m in groups.values() for f in m}
        merged = {g: tuple(f for f in m if f not in moved) for g, m in merged.items()}
        merged = {g: m for g, m in merged.items() if m}
        merged.update(groups)
        kw["groups"] = GroupSpec(merged)
    if kw.get("workers", 1) < 1:
        raise ConfigError("workers must be >= 1")
    return PipelineConfig(**kw)


def load_config(path: str | os.PathLike | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    p = Path(path)
    values = read_flat_config(p.read_text(encoding="utf-8"), str(p))
    return config_from_mapping(values, base_dir=p.parent)
