"""Coverage, engagement, win/loss counting and the oracle ranking.

Engagement rewards runs of consequential judgments and penalizes long
inconsequential stretches: maximal inconsequential runs contribute
1/(1+len) each, consequential documents contribute 1 each, normalized by
the number of documents encountered.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import CorpusIndex
from .errors import UndefinedMetricError, ValidationError
from .lm import ScoredList


@dataclass(frozen=True)
class GroundTruth:
    """Per-entity reference: relevant keyphrases and relevant documents."""

    entity_id: str
    relevant_keyphrases: frozenset[str]
    relevant_docs: frozenset[str]


@dataclass
class EngagementTrace:
    """Ordered consequential flags, one per judged document."""

    flags: list[bool] = field(default_factory=list)

    def append(self, consequential: bool) -> None:
        self.flags.append(consequential)


def coverage_at(accepted: set[str], truth: GroundTruth) -> float:
    if not truth.relevant_keyphrases:
        raise UndefinedMetricError("coverage undefined for empty relevant keyphrase set")
    return len(accepted & truth.relevant_keyphrases) / len(truth.relevant_keyphrases)


def engagement_at(trace: EngagementTrace | list[bool]) -> float:
    flags = trace.flags if isinstance(trace, EngagementTrace) else list(trace)
    if not flags:
        raise UndefinedMetricError("engagement undefined for empty trace")
    total = 0.0
    run_len = 0
    for flag in flags:
        if flag:
            if run_len:
                total += 1.0 / (1 + run_len)
                run_len = 0
            total += 1.0
        else:
            run_len += 1
    if run_len:
        total += 1.0 / (1 + run_len)
    return total / len(flags)


def ideal_ranking(
    index: CorpusIndex,
    candidates: set[str],
    truth: GroundTruth,
    depth: int,
) -> ScoredList:
    """Greedy max-cover over only the ground-truth relevant keyphrases."""
    if depth < 1:
        raise ValidationError("depth must be >= 1")
    k_e = set(truth.relevant_keyphrases)
    remaining = {
        d: set(index.documents[d].keyphrases) & k_e
        for d in candidates
        if d in index.documents
    }
    covered: set[str] = set()
    picks: ScoredList = []
    while remaining and len(picks) < depth:
        best_id = None
        best_gain = -1
        for doc_id in remaining:
            gain = len(remaining[doc_id] - covered)
            if gain > best_gain or (gain == best_gain and doc_id < best_id):
                best_id, best_gain = doc_id, gain
        picks.append((best_id, float(best_gain)))
        covered |= remaining.pop(best_id)
    return picks


def win_loss(per_query_cov: dict[str, tuple[float, float]]) -> tuple[int, int]:
    """(wins, losses) of strategy vs baseline coverage; ties count in neither."""
    wins = sum(1 for s, b in per_query_cov.values() if s > b)
    losses = sum(1 for s, b in per_query_cov.values() if s < b)
    return wins, losses
