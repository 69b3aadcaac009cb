"""Greedy maximum-coverage ranking over keyphrase or entity aspect spaces.

The greedy pick maximizes marginal aspect coverage at every step (the
classic (1 - 1/e) approximation); all aspects of a judged document join the
covered set whether or not the judgment was positive, so already-seen
context attracts no further gain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .corpus import Document
from .errors import ValidationError
from .lm import ScoredList


class AspectSpace(Enum):
    KEYPHRASE = "keyphrase"
    ENTITY = "entity"


@dataclass
class CoveredSet:
    """Aspects already shown to the user; grows monotonically."""

    aspects: set[str] = field(default_factory=set)

    def copy(self) -> "CoveredSet":
        return CoveredSet(set(self.aspects))


def aspect_of(doc: Document, space: AspectSpace) -> set[str]:
    if space is AspectSpace.KEYPHRASE:
        return set(doc.keyphrases)
    return doc.entity_ids()


def update_covered(covered: CoveredSet, judged_doc: Document, space: AspectSpace) -> CoveredSet:
    """Relevance is deliberately not consulted."""
    return CoveredSet(covered.aspects | aspect_of(judged_doc, space))


def greedy_diverse_rank(
    documents: dict[str, Document],
    candidates: set[str],
    space: AspectSpace,
    covered: CoveredSet,
    budget: int,
) -> ScoredList:
    """Iteratively pick the candidate with maximum marginal coverage.

    Ties break by ascending doc id; zero-gain docs still fill the budget so
    a session can continue past a coverage plateau. Scores are the marginal
    gains, which are non-increasing along the pick order.
    """
    if budget < 1:
        raise ValidationError("budget must be >= 1")
    seen = set(covered.aspects)
    remaining = {d: aspect_of(documents[d], space) for d in candidates}
    picks: ScoredList = []
    while remaining and len(picks) < budget:
        best_id = None
        best_gain = -1
        for doc_id in remaining:
            gain = len(remaining[doc_id] - seen)
            if gain > best_gain or (gain == best_gain and doc_id < best_id):
                best_id, best_gain = doc_id, gain
        picks.append((best_id, float(best_gain)))
        seen |= remaining.pop(best_id)
    return picks


def diversify_with_feedback(session, space: AspectSpace) -> str | None:
    """Head of the feedback-aware diversified ranking, or None when exhausted.

    Re-retrieves the pool under the expanded query, and seeds the covered
    set with the session's covered aspects plus, in keyphrase space, every
    keyphrase the user already accepted or rejected.
    """
    from .lm import retrieve_candidates
    from .session import rocchio_expand

    query = rocchio_expand(session)
    pool = retrieve_candidates(session.index, query)
    session.candidate_pool = pool
    remaining = pool - session.shown_doc_ids
    if session.pending:
        remaining.discard(session.pending)
    if not remaining:
        return None
    covered = set(session.covered_aspects)
    if space is AspectSpace.KEYPHRASE:
        covered |= set(session.accepted) | session.rejected
    head = greedy_diverse_rank(
        session.index.documents, remaining, space, CoveredSet(covered), budget=1
    )
    return head[0][0]


def brute_force_max_coverage(
    documents: dict[str, Document],
    candidates: set[str],
    space: AspectSpace,
    covered: set[str],
    budget: int,
) -> int:
    """Exhaustive optimum for small instances; oracle for the greedy bound."""
    from itertools import combinations

    aspect_sets = {d: aspect_of(documents[d], space) - covered for d in candidates}
    ids = sorted(aspect_sets)
    best = 0
    for size in range(1, min(budget, len(ids)) + 1):
        for combo in combinations(ids, size):
            union: set[str] = set()
            for d in combo:
                union |= aspect_sets[d]
            best = max(best, len(union))
    return best
