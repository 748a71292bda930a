"""topicwatch: weekly topic dynamics and user-activity monitoring."""

from .coherence import CoherenceConfig, CoherenceResult, build_windows, cv_coherence, npmi
from .config import PipelineConfig, load_config
from .corpus import (
    CorpusWeek,
    Document,
    PreprocessConfig,
    detect_persistent_outliers,
    ingest,
    normalize,
    partition_weeks,
    prune_lengths,
    term_frequencies,
)
from .dynamics import (
    ActivityMatrix,
    DispersionGroup,
    WeekAssignments,
    build_activity_matrix,
    dispersion_groups,
    normalize_activity,
    topic_timeseries,
)
from .graphs import WeekGraph, build_graph, serialize_graph
from .kmeans import ElbowResult, KMeansResult, elbow, kmeans
from .lda import LdaConfig, TopicModel, fit, log_likelihood, optimize_alpha
from .modelsel import SelectionRule, SweepResult, select_k, sweep
from .pipeline import PipelineRun
from .topics import (
    RelevanceRanking,
    ThemeMap,
    UniqueTopicSet,
    assign_themes,
    build_unique_set,
    load_theme_map,
    prevalent_topic,
    rank_relevance,
    suggest_themes,
)

__version__ = "0.1.0"

__all__ = [
    "ActivityMatrix",
    "CoherenceConfig",
    "CoherenceResult",
    "CorpusWeek",
    "DispersionGroup",
    "Document",
    "ElbowResult",
    "KMeansResult",
    "LdaConfig",
    "PipelineConfig",
    "PipelineRun",
    "PreprocessConfig",
    "RelevanceRanking",
    "SelectionRule",
    "SweepResult",
    "ThemeMap",
    "TopicModel",
    "UniqueTopicSet",
    "WeekAssignments",
    "WeekGraph",
    "assign_themes",
    "build_activity_matrix",
    "build_graph",
    "build_unique_set",
    "build_windows",
    "cv_coherence",
    "detect_persistent_outliers",
    "dispersion_groups",
    "elbow",
    "fit",
    "ingest",
    "kmeans",
    "load_config",
    "load_theme_map",
    "log_likelihood",
    "normalize",
    "normalize_activity",
    "npmi",
    "optimize_alpha",
    "partition_weeks",
    "prevalent_topic",
    "prune_lengths",
    "rank_relevance",
    "select_k",
    "serialize_graph",
    "suggest_themes",
    "sweep",
    "term_frequencies",
    "topic_timeseries",
]
