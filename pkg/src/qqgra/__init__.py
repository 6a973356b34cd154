"""Question-quality features and grey relational analysis for CQA sites."""

__version__ = "0.1.0"

from .config import CleaningRules, GroupSpec, PipelineConfig, load_config  # noqa: E402
from .features import FEATURE_NAMES, CountingMode, FeatureVector, Lexicon, extract_features  # noqa: E402
from .gra import Direction, GraConfig, InfluenceClass, RawSeries, classify_influence, run_gra  # noqa: E402
from .pipeline import analyze, run_pipeline  # noqa: E402
from .records import QuestionRecord, load_records, load_traffic  # noqa: E402
from .report import GraReport, OutputFormat, emit_plot_data, render_report  # noqa: E402

__all__ = [
    "CleaningRules", "CountingMode", "Direction", "FEATURE_NAMES", "FeatureVector",
    "GraConfig", "GraReport", "GroupSpec", "InfluenceClass", "Lexicon", "OutputFormat",
    "PipelineConfig", "QuestionRecord", "RawSeries", "analyze", "classify_influence",
    "emit_plot_data", "extract_features", "load_config", "load_records", "load_traffic",
    "render_report", "run_gra", "run_pipeline",
]
