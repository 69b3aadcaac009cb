"""Context-overlap disambiguation: the extrinsic quality proxy.

A mention is linked to the candidate whose keyphrase representation overlaps
the document context most, weighted by representation weight times context
count; ties fall back to the candidate's prior, then to ascending id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .corpus import Document, canonicalize
from .errors import UndefinedMetricError, ValidationError
from .session import EntityRepresentation


@dataclass(frozen=True)
class EntityRecord:
    """One knowledge-base entry: id, surface names, weighted keyphrases."""

    entity_id: str
    names: tuple[str, ...]
    keyphrases: dict[str, float]


@dataclass(frozen=True)
class CandidateSet:
    mention: str
    candidates: tuple[tuple[str, dict[str, float], float], ...]

    def __post_init__(self):
        if not self.candidates:
            raise ValidationError("candidate set must be non-empty")
        if any(prior < 0 for _i, _r, prior in self.candidates):
            raise ValidationError("priors must be >= 0")


def disambiguate(context_keyphrases: dict[str, int], cand: CandidateSet) -> str:
    """Argmax of overlap score; ties by higher prior, then id ascending."""
    best = None
    for entity_id, rep, prior in cand.candidates:
        score = sum(
            weight * context_keyphrases[kp]
            for kp, weight in rep.items()
            if kp in context_keyphrases
        )
        key = (-score, -prior, entity_id)
        if best is None or key < best[0]:
            best = (key, entity_id)
    return best[1]


def load_kb(path: str | Path) -> list[EntityRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            records.append(
                EntityRecord(
                    entity_id=rec["id"],
                    names=tuple(canonicalize(n) for n in rec["names"]),
                    keyphrases={canonicalize(k): float(w) for k, w in rec["keyphrases"].items()},
                )
            )
    return records


def save_kb(records: list[EntityRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in sorted(records, key=lambda r: r.entity_id):
            fh.write(
                json.dumps(
                    {
                        "id": rec.entity_id,
                        "names": list(rec.names),
                        "keyphrases": rec.keyphrases,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def disambiguation_accuracy(
    target_id: str,
    representation: EntityRepresentation,
    truth_docs: list[tuple[Document, list[str]]],
    kb: list[EntityRecord],
    doc_freq: dict[str, int],
) -> float:
    """Percentage of gold mentions linked back to the target entity.

    For each gold mention the candidate set is every KB entity sharing that
    name plus the target carrying the harvested representation; priors are
    corpus document frequencies normalized per mention.
    """
    competitors = [rec for rec in kb if rec.entity_id != target_id]
    target_rep = dict(representation.keyphrases)
    total = 0
    correct = 0
    for doc, mentions in truth_docs:
        context = dict(doc.keyphrases)
        for mention in mentions:
            mention = canonicalize(mention)
            cands: list[tuple[str, dict[str, float], float]] = [
                (rec.entity_id, rec.keyphrases, float(doc_freq.get(rec.entity_id, 0)))
                for rec in competitors
                if mention in rec.names
            ]
            cands.append((target_id, target_rep, float(doc_freq.get(target_id, 0))))
            prior_sum = sum(p for _i, _r, p in cands)
            if prior_sum > 0:
                cands = [(i, r, p / prior_sum) for i, r, p in cands]
            total += 1
            predicted = disambiguate(
                context, CandidateSet(mention=mention, candidates=tuple(cands))
            )
            if predicted == target_id:
                correct += 1
    if total == 0:
        raise UndefinedMetricError("no gold mentions to evaluate")
    return 100.0 * correct / total
