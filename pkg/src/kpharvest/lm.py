"""Candidate retrieval and Dirichlet-smoothed language-model ranking.

Queries are weighted keyphrase/term vectors plus a name list. Multi-token
entries score by contiguous sequence-match counts in the token stream; terms
absent from the whole collection fall back to a small floor probability so
user-typed keyphrases keep scores finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .corpus import CorpusIndex, canonicalize
from .errors import ValidationError

DEFAULT_MU = 1000.0
OOV_FLOOR = 1e-9

# (doc_id, score) pairs, sorted by (score desc, doc_id asc)
ScoredList = list[tuple[str, float]]


@dataclass(frozen=True)
class QueryVector:
    """Weighted term/keyphrase vector with the entity's surface names."""

    weights: dict[str, float] = field(default_factory=dict)
    names: tuple[str, ...] = ()

    def __post_init__(self):
        dropped = {t: w for t, w in self.weights.items() if w != 0.0}
        object.__setattr__(self, "weights", dropped)

    def positive_terms(self) -> dict[str, float]:
        return {t: w for t, w in self.weights.items() if w > 0}


def make_seed_query(names: list[str], seed_keyphrases: list[str]) -> QueryVector:
    """Initial session query: names and seeds, uniform weight 1."""
    if not names:
        raise ValidationError("names must be non-empty")
    weights: dict[str, float] = {}
    for name in names:
        weights[canonicalize(name)] = 1.0
    for kp in seed_keyphrases:
        weights[canonicalize(kp)] = 1.0
    return QueryVector(weights=weights, names=tuple(names))


def retrieve_candidates(index: CorpusIndex, query: QueryVector) -> set[str]:
    """Union of docs matching any name or positively-weighted query entry."""
    if not query.names:
        raise ValidationError("query has no names")
    candidates: set[str] = set()
    for name in query.names:
        candidates |= index.matching_docs(canonicalize(name))
    for term in query.positive_terms():
        candidates |= index.matching_docs(term)
    return candidates


def _term_prob(index: CorpusIndex, term: str, doc_id: str, mu: float) -> float:
    tf = index.phrase_occurrences(term).get(doc_id, 0)
    cf = index.phrase_collection_freq(term)
    p_coll = cf / index.total_tokens if index.total_tokens else 0.0
    if p_coll == 0.0:
        return OOV_FLOOR
    dl = index.doc_length(doc_id)
    return (tf + mu * p_coll) / (dl + mu)


def lm_score(index: CorpusIndex, doc_id: str, query: QueryVector, mu: float = DEFAULT_MU) -> float:
    """Sum of weight(t) * log p(t|d) over positively-weighted query entries."""
    if mu <= 0:
        raise ValidationError("mu must be > 0")
    index.get(doc_id)
    score = 0.0
    for term, weight in query.positive_terms().items():
        score += weight * math.log(_term_prob(index, term, doc_id, mu))
    return score


def rank_lm(
    index: CorpusIndex,
    candidates: set[str],
    query: QueryVector,
    mu: float = DEFAULT_MU,
) -> ScoredList:
    scored = [(doc_id, lm_score(index, doc_id, query, mu)) for doc_id in candidates]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored
