"""Interactive keyphrase harvesting for emerging entities."""

from .corpus import (
    CorpusIndex,
    Document,
    EicSnippet,
    cooccurrence_histogram,
    fallback_extract_keyphrases,
    ingest_corpus,
    load_index,
    make_snippets,
    save_index,
)
from .diversify import (
    AspectSpace,
    CoveredSet,
    aspect_of,
    diversify_with_feedback,
    greedy_diverse_rank,
    update_covered,
)
from .lm import QueryVector, lm_score, rank_lm, retrieve_candidates
from .metrics import (
    EngagementTrace,
    GroundTruth,
    coverage_at,
    engagement_at,
    ideal_ranking,
    win_loss,
)
from .session import (
    EntityRepresentation,
    Judgment,
    Session,
    apply_judgment,
    finish_session,
    next_document,
    rocchio_expand,
    start_session,
)
from .simulator import (
    SimConfig,
    WorkloadEntry,
    generate_workload,
    run_experiment,
    simulated_judge,
    synth_corpus,
)
from .strategies import STRATEGY_NAMES, StrategyConfig, build_strategy

__version__ = "0.1.0"

__all__ = [
    "AspectSpace",
    "CorpusIndex",
    "CoveredSet",
    "Document",
    "EicSnippet",
    "EngagementTrace",
    "EntityRepresentation",
    "GroundTruth",
    "Judgment",
    "QueryVector",
    "STRATEGY_NAMES",
    "Session",
    "SimConfig",
    "StrategyConfig",
    "WorkloadEntry",
    "apply_judgment",
    "aspect_of",
    "build_strategy",
    "cooccurrence_histogram",
    "coverage_at",
    "diversify_with_feedback",
    "engagement_at",
    "fallback_extract_keyphrases",
    "finish_session",
    "generate_workload",
    "greedy_diverse_rank",
    "ideal_ranking",
    "ingest_corpus",
    "lm_score",
    "load_index",
    "make_snippets",
    "next_document",
    "rank_lm",
    "retrieve_candidates",
    "rocchio_expand",
    "run_experiment",
    "save_index",
    "simulated_judge",
    "start_session",
    "synth_corpus",
    "update_covered",
    "win_loss",
]
