"""Per-entity episode state: judgments, Rocchio feedback, strategy dispatch.

A session is a serial state machine. Exactly one document is pending at a
time; judging it folds its keyphrases into the accepted/rejected sets,
updates the covered aspect state, and the next draw is delegated to the
configured strategy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

from .corpus import CorpusIndex, canonicalize
from .diversify import aspect_of
from .errors import JudgmentOrderError, ValidationError
from .lm import QueryVector, make_seed_query, retrieve_candidates

if TYPE_CHECKING:
    from .strategies import Strategy

ROCCHIO_ALPHA = 1.0
ROCCHIO_BETA = 0.75
ROCCHIO_GAMMA = 0.15


@dataclass(frozen=True)
class Judgment:
    doc_id: str
    relevant: bool
    accepted_keyphrases: frozenset[str]
    consequential: bool


@dataclass(frozen=True)
class EntityRepresentation:
    """Names plus L1-normalized keyphrase weights, ready for disambiguation."""

    names: tuple[str, ...]
    keyphrases: dict[str, float]


@dataclass
class Session:
    index: CorpusIndex
    names: list[str]
    seed_keyphrases: list[str]
    strategy: "Strategy"
    accepted: dict[str, float] = field(default_factory=dict)
    rejected: set[str] = field(default_factory=set)
    judgments: list[Judgment] = field(default_factory=list)
    covered_aspects: set[str] = field(default_factory=set)
    candidate_pool: set[str] = field(default_factory=set)
    initial_pool: set[str] = field(default_factory=set)
    pending: Optional[str] = None
    exhausted: bool = False
    mu: float = 1000.0

    @property
    def shown_doc_ids(self) -> set[str]:
        return {j.doc_id for j in self.judgments}

    @property
    def trace(self) -> list[bool]:
        return [j.consequential for j in self.judgments]

    def seed_query(self) -> QueryVector:
        return make_seed_query(self.names, self.seed_keyphrases)

    def harvested_keyphrases(self) -> set[str]:
        """Accepted keyphrases excluding the seeds (selected from EICs only)."""
        seeds = {canonicalize(k) for k in self.seed_keyphrases}
        return set(self.accepted) - seeds


def start_session(
    index: CorpusIndex,
    names: list[str],
    seed_keyphrases: list[str],
    strategy_config,
    mu: float = 1000.0,
) -> Session:
    from .strategies import build_strategy

    if not names:
        raise ValidationError("names must be non-empty")
    strategy = build_strategy(strategy_config)
    session = Session(
        index=index,
        names=list(names),
        seed_keyphrases=[canonicalize(k) for k in seed_keyphrases],
        strategy=strategy,
        mu=mu,
    )
    for kp in session.seed_keyphrases:
        session.accepted[kp] = 1.0
    session.initial_pool = retrieve_candidates(index, session.seed_query())
    session.candidate_pool = set(session.initial_pool)
    strategy.attach(session)
    return session


def _normalized_freq(doc, keyphrase: str) -> float:
    total = sum(doc.keyphrases.values())
    return doc.keyphrases.get(keyphrase, 0) / total if total else 0.0


def apply_judgment(
    session: Session,
    doc_id: str,
    relevant: bool,
    accepted_keyphrases: set[str],
) -> Session:
    if session.pending != doc_id:
        raise JudgmentOrderError(
            f"doc {doc_id!r} is not the pending document "
            f"(pending: {session.pending!r})"
        )
    doc = session.index.get(doc_id)
    accepted = {canonicalize(k) for k in accepted_keyphrases}
    k_d = set(doc.keyphrases)
    if not accepted <= k_d:
        raise ValidationError(
            f"accepted keyphrases not in document: {sorted(accepted - k_d)}"
        )
    if not relevant and accepted:
        raise ValidationError("a rejected document cannot accept keyphrases")

    newly_added = accepted - set(session.accepted)
    consequential = bool(newly_added)

    if relevant:
        for kp in accepted:
            session.accepted[kp] = session.accepted.get(kp, 0.0) + _normalized_freq(doc, kp)
        session.rejected -= accepted
        session.rejected |= (k_d - accepted) - set(session.accepted)
    else:
        session.rejected |= k_d - set(session.accepted)

    space = session.strategy.aspect_space
    if space is not None:
        session.covered_aspects |= aspect_of(doc, space)

    session.judgments.append(
        Judgment(
            doc_id=doc_id,
            relevant=relevant,
            accepted_keyphrases=frozenset(accepted),
            consequential=consequential,
        )
    )
    session.pending = None
    return session


def rocchio_expand(
    session: Session,
    alpha: float = ROCCHIO_ALPHA,
    beta: float = ROCCHIO_BETA,
    gamma: float = ROCCHIO_GAMMA,
    q0: QueryVector | None = None,
) -> QueryVector:
    """Expanded query from explicit judgments.

    Positive contributions are restricted to keyphrases the user accepted in
    each relevant document (not the full document vector); rejected docs
    contribute their whole keyphrase vector negatively. Entries in the
    rejected set are clamped to <= 0, zero entries dropped.
    """
    base = q0 if q0 is not None else session.seed_query()
    if not session.judgments:
        return base

    weights: dict[str, float] = {t: alpha * w for t, w in base.weights.items()}
    relevant = [j for j in session.judgments if j.relevant]
    irrelevant = [j for j in session.judgments if not j.relevant]

    if relevant:
        coef = beta / len(relevant)
        for j in relevant:
            doc = session.index.get(j.doc_id)
            for kp in j.accepted_keyphrases:
                weights[kp] = weights.get(kp, 0.0) + coef * _normalized_freq(doc, kp)
    if irrelevant:
        coef = gamma / len(irrelevant)
        for j in irrelevant:
            doc = session.index.get(j.doc_id)
            for kp in doc.keyphrases:
                weights[kp] = weights.get(kp, 0.0) - coef * _normalized_freq(doc, kp)

    for kp in session.rejected:
        if kp in weights and weights[kp] > 0:
            weights[kp] = 0.0

    return QueryVector(weights=weights, names=base.names)


def next_document(session: Session) -> Optional[str]:
    """The next unseen document per the strategy, or None when exhausted."""
    if session.exhausted:
        return None
    if session.pending is not None:
        return session.pending
    doc_id = session.strategy.next_doc(session)
    if doc_id is None:
        session.exhausted = True
        return None
    if doc_id in session.shown_doc_ids:
        raise RuntimeError(f"strategy re-emitted already shown doc {doc_id!r}")
    session.pending = doc_id
    return doc_id


def finish_session(session: Session) -> EntityRepresentation:
    """L1-normalized representation of everything accepted so far."""
    total = sum(session.accepted.values())
    if total <= 0:
        return EntityRepresentation(names=tuple(session.names), keyphrases={})
    return EntityRepresentation(
        names=tuple(session.names),
        keyphrases={k: w / total for k, w in sorted(session.accepted.items())},
    )
