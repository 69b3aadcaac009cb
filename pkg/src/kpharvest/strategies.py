"""Next-document providers and the interleaving controller.

Every strategy is attached to one session and drawn from serially. Static
strategies freeze their ranking at attach time; feedback strategies
re-expand the query and re-retrieve as judgments arrive; the interleaving
controller serves from a frozen static prefix and a continuously
recomputed dynamic side, switching whenever the last judgment added no new
keyphrase.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .diversify import (
    AspectSpace,
    CoveredSet,
    diversify_with_feedback,
    greedy_diverse_rank,
)
from .errors import UnknownStrategyError, ValidationError
from .lm import rank_lm, retrieve_candidates
from .metrics import GroundTruth, ideal_ranking
from .session import Session, rocchio_expand

DEFAULT_STATIC_DEPTH = 20

STRATEGY_NAMES = (
    "Lm",
    "Lm-Feedback",
    "Div_Kp",
    "Div_Kp-Feedback",
    "Div_Ent",
    "Div_Ent-Feedback",
    "I(Lm,Lm-Feedback)",
    "I(Div_Kp,Div_Kp-Feedback)",
    "I(Lm,Div_Kp-Feedback)",
    "I(Div_Ent,Div_Ent-Feedback)",
    "I(Lm,Div_Ent-Feedback)",
    "Ideal",
)

_SPACES = {"Div_Kp": AspectSpace.KEYPHRASE, "Div_Ent": AspectSpace.ENTITY}


@dataclass(frozen=True)
class StrategyConfig:
    name: str
    truth: Optional[GroundTruth] = None
    static_depth: int = DEFAULT_STATIC_DEPTH


class Strategy:
    """Base: a named provider bound to one session."""

    name: str = ""
    aspect_space: Optional[AspectSpace] = None

    def attach(self, session: Session) -> None:
        pass

    def next_doc(self, session: Session) -> Optional[str]:
        raise NotImplementedError

    def fresh_head(self, session: Session) -> Optional[str]:
        """Recompute from current session state, ignoring any caching."""
        return self.next_doc(session)


def _first_unseen(ranking, session: Session) -> Optional[str]:
    shown = session.shown_doc_ids
    for doc_id, _score in ranking:
        if doc_id not in shown and doc_id != session.pending:
            return doc_id
    return None


class LmStrategy(Strategy):
    name = "Lm"

    def __init__(self):
        self._ranking = None

    def attach(self, session: Session) -> None:
        self._ranking = rank_lm(
            session.index, session.initial_pool, session.seed_query(), session.mu
        )

    def next_doc(self, session: Session) -> Optional[str]:
        return _first_unseen(self._ranking, session)


class LmFeedbackStrategy(Strategy):
    name = "Lm-Feedback"

    def __init__(self):
        self._ranking = None
        self._relevant_at_recompute = -1

    def _recompute(self, session: Session) -> None:
        query = rocchio_expand(session)
        pool = retrieve_candidates(session.index, query)
        session.candidate_pool = pool
        self._ranking = rank_lm(session.index, pool, query, session.mu)
        self._relevant_at_recompute = sum(j.relevant for j in session.judgments)

    def next_doc(self, session: Session) -> Optional[str]:
        n_relevant = sum(j.relevant for j in session.judgments)
        # retrieval re-triggers on each relevant document encountered
        if self._ranking is None or n_relevant > self._relevant_at_recompute:
            self._recompute(session)
        return _first_unseen(self._ranking, session)

    def fresh_head(self, session: Session) -> Optional[str]:
        self._recompute(session)
        return _first_unseen(self._ranking, session)


class DivStrategy(Strategy):
    def __init__(self, space: AspectSpace):
        self.aspect_space = space
        self.name = "Div_Kp" if space is AspectSpace.KEYPHRASE else "Div_Ent"

    def next_doc(self, session: Session) -> Optional[str]:
        remaining = session.initial_pool - session.shown_doc_ids
        if session.pending:
            remaining.discard(session.pending)
        if not remaining:
            return None
        head = greedy_diverse_rank(
            session.index.documents,
            remaining,
            self.aspect_space,
            CoveredSet(set(session.covered_aspects)),
            budget=1,
        )
        return head[0][0]


class DivFeedbackStrategy(Strategy):
    def __init__(self, space: AspectSpace):
        self.aspect_space = space
        self.name = (
            "Div_Kp-Feedback" if space is AspectSpace.KEYPHRASE else "Div_Ent-Feedback"
        )

    def next_doc(self, session: Session) -> Optional[str]:
        return diversify_with_feedback(session, self.aspect_space)


class IdealStrategy(Strategy):
    name = "Ideal"

    def __init__(self, truth: GroundTruth):
        self.truth = truth
        self._ranking = None

    def attach(self, session: Session) -> None:
        depth = max(1, len(session.initial_pool))
        self._ranking = ideal_ranking(session.index, session.initial_pool, self.truth, depth)

    def next_doc(self, session: Session) -> Optional[str]:
        return _first_unseen(self._ranking, session)


@dataclass
class InterleaveState:
    static_list: list[str] = field(default_factory=list)
    static_cursor: int = 0
    active: str = "static"
    draw_log: list[dict] = field(default_factory=list)


class InterleaveStrategy(Strategy):
    """Serve from a frozen static prefix; switch sides after an
    inconsequential judgment; recompute the dynamic ranking at each draw."""

    def __init__(self, static: Strategy, dynamic: Strategy, depth: int = DEFAULT_STATIC_DEPTH):
        self.static = static
        self.dynamic = dynamic
        self.depth = depth
        self.name = f"I({static.name},{dynamic.name})"
        self.aspect_space = dynamic.aspect_space or static.aspect_space
        self.state = InterleaveState()

    def attach(self, session: Session) -> None:
        if isinstance(self.static, LmStrategy):
            ranking = rank_lm(
                session.index, session.initial_pool, session.seed_query(), session.mu
            )
        else:
            ranking = greedy_diverse_rank(
                session.index.documents,
                session.initial_pool,
                self.static.aspect_space,
                CoveredSet(set()),
                budget=self.depth,
            )
        self.state.static_list = [doc_id for doc_id, _ in ranking[: self.depth]]

    def _static_peek(self, session: Session) -> Optional[tuple[int, str]]:
        shown = session.shown_doc_ids
        for idx in range(self.state.static_cursor, len(self.state.static_list)):
            doc_id = self.state.static_list[idx]
            if doc_id not in shown and doc_id != session.pending:
                return idx, doc_id
        return None

    def next_doc(self, session: Session) -> Optional[str]:
        state = self.state
        if session.judgments and not session.judgments[-1].consequential:
            state.active = "dynamic" if state.active == "static" else "static"

        static_hit = self._static_peek(session)
        dynamic_hit = self.dynamic.fresh_head(session)
        static_live = static_hit is not None
        dynamic_live = dynamic_hit is not None

        if state.active == "static":
            side = "static" if static_live else "dynamic"
        else:
            side = "dynamic" if dynamic_live else "static"

        if side == "static" and static_live:
            idx, doc_id = static_hit
            state.static_cursor = idx + 1
        elif side == "dynamic" and dynamic_live:
            doc_id = dynamic_hit
        else:
            return None

        state.draw_log.append(
            {
                "doc_id": doc_id,
                "side": side,
                "active": state.active,
                "static_live": static_live,
                "dynamic_live": dynamic_live,
            }
        )
        return doc_id


def build_strategy(config: StrategyConfig | str) -> Strategy:
    if isinstance(config, str):
        config = StrategyConfig(name=config)
    name = config.name
    if name not in STRATEGY_NAMES:
        raise UnknownStrategyError(f"unknown strategy {name!r}")
    if name == "Lm":
        return LmStrategy()
    if name == "Lm-Feedback":
        return LmFeedbackStrategy()
    if name in _SPACES:
        return DivStrategy(_SPACES[name])
    if name.endswith("-Feedback") and name[: -len("-Feedback")] in _SPACES:
        return DivFeedbackStrategy(_SPACES[name[: -len("-Feedback")]])
    if name == "Ideal":
        if config.truth is None:
            raise ValidationError("Ideal strategy requires ground truth")
        return IdealStrategy(config.truth)
    inner = name[2:-1]
    static_name, dynamic_name = inner.split(",", 1)
    static = build_strategy(StrategyConfig(name=static_name, truth=config.truth))
    dynamic = build_strategy(StrategyConfig(name=dynamic_name, truth=config.truth))
    return InterleaveStrategy(static, dynamic, depth=config.static_depth)
