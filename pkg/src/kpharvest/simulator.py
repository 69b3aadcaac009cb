"""Simulated user, workload generation, synthetic corpora, experiment runner.

The synthetic generator builds entity pairs: a long-tail target entity and a
more frequent "head" competitor sharing one of its names. Target documents
draw keyphrases from per-aspect clusters and carry companion entity
annotations correlated with those clusters; head documents carry per-doc
unique noise keyphrases. That structure reproduces, at desk scale, the
dynamics the strategies are designed around: textual relevance specializes
on the seed cluster, keyphrase-space diversification drifts into the noisy
head documents, entity-space diversification walks the aspect clusters.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import CorpusIndex, Document, ingest_corpus
from .disambig import EntityRecord, disambiguation_accuracy, load_kb, save_kb
from .errors import ValidationError
from .metrics import GroundTruth, coverage_at, engagement_at
from .session import (
    EntityRepresentation,
    apply_judgment,
    finish_session,
    next_document,
    start_session,
)
from .strategies import STRATEGY_NAMES, InterleaveStrategy, StrategyConfig

DEFAULT_CHECKPOINTS = (5, 10, 15, 20)

CSV_COLUMNS = ("query", "strategy", "k", "coverage", "engagement", "accuracy", "exhausted")


@dataclass(frozen=True)
class WorkloadEntry:
    entity_id: str
    names: tuple[str, ...]
    seed_keyphrases: tuple[str, ...]
    truth: GroundTruth


@dataclass
class SimConfig:
    corpus: str
    workload: str
    kb: str
    out_dir: str
    strategies: list[str] = field(default_factory=lambda: list(STRATEGY_NAMES))
    max_k: int = 20
    checkpoints: tuple[int, ...] = DEFAULT_CHECKPOINTS
    seed: int = 0
    truth_sample: int = 20
    static_depth: int = 20
    mu: float = 1000.0

    def __post_init__(self):
        if self.max_k < 1:
            raise ValidationError("max_k must be >= 1")


# ---------------------------------------------------------------------------
# simulated user


def simulated_judge(doc: Document, truth: GroundTruth) -> tuple[bool, set[str]]:
    """Relevant iff the doc is tagged with the entity; accepted keyphrases
    are exactly the document keyphrases present in the reference set."""
    relevant = doc.doc_id in truth.relevant_docs
    if not relevant:
        return False, set()
    return True, set(doc.keyphrases) & set(truth.relevant_keyphrases)


# ---------------------------------------------------------------------------
# workload


def generate_workload(
    index: CorpusIndex,
    reference_sets: list[EntityRecord],
    max_doc_freq: int = 2000,
    min_kps: int = 50,
    require_ambiguous: bool = True,
) -> list[WorkloadEntry]:
    """Entities that are long-tail, well-covered and ambiguous in this corpus."""
    name_owners: dict[str, set[str]] = {}
    for rec in reference_sets:
        if index.entity_postings.get(rec.entity_id):
            for name in rec.names:
                name_owners.setdefault(name, set()).add(rec.entity_id)

    entries = []
    for rec in sorted(reference_sets, key=lambda r: r.entity_id):
        relevant_docs = index.entity_postings.get(rec.entity_id, set())
        if not relevant_docs or len(relevant_docs) > max_doc_freq:
            continue
        in_collection = sorted(
            kp for kp in rec.keyphrases if kp in index.keyphrase_postings
        )
        if len(in_collection) < min_kps:
            continue
        if require_ambiguous:
            ambiguous = any(
                name_owners.get(name, set()) - {rec.entity_id} for name in rec.names
            )
            if not ambiguous:
                continue
        seeds = sorted(
            in_collection,
            key=lambda kp: (-len(index.keyphrase_postings[kp]), kp),
        )[:3]
        entries.append(
            WorkloadEntry(
                entity_id=rec.entity_id,
                names=rec.names,
                seed_keyphrases=tuple(seeds),
                truth=GroundTruth(
                    entity_id=rec.entity_id,
                    relevant_keyphrases=frozenset(in_collection),
                    relevant_docs=frozenset(relevant_docs),
                ),
            )
        )
    return entries


def save_workload(entries: list[WorkloadEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(
                json.dumps(
                    {
                        "entity": e.entity_id,
                        "names": list(e.names),
                        "seed_keyphrases": list(e.seed_keyphrases),
                        "relevant_keyphrases": sorted(e.truth.relevant_keyphrases),
                        "relevant_docs": sorted(e.truth.relevant_docs),
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def load_workload(path: str | Path) -> list[WorkloadEntry]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            entries.append(
                WorkloadEntry(
                    entity_id=rec["entity"],
                    names=tuple(rec["names"]),
                    seed_keyphrases=tuple(rec["seed_keyphrases"]),
                    truth=GroundTruth(
                        entity_id=rec["entity"],
                        relevant_keyphrases=frozenset(rec["relevant_keyphrases"]),
                        relevant_docs=frozenset(rec["relevant_docs"]),
                    ),
                )
            )
    return entries


# ---------------------------------------------------------------------------
# synthetic corpus


_SYLLABLES = (
    "ba be bi bo bu da de di do du fa fe fi fo fu ga ge gi go gu "
    "ka ke ki ko ku la le li lo lu ma me mi mo mu na ne ni no nu "
    "pa pe pi po pu ra re ri ro ru sa se si so su ta te ti to tu "
    "va ve vi vo vu za ze zi zo zu"
).split()


class _WordForge:
    """Deterministic unique pseudo-word source."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.used: set[str] = set()

    def word(self, min_syl: int = 2, max_syl: int = 3) -> str:
        while True:
            n = self.rng.randint(min_syl, max_syl)
            w = "".join(self.rng.choice(_SYLLABLES) for _ in range(n))
            if w not in self.used:
                self.used.add(w)
                return w

    def phrase(self, max_words: int = 2) -> str:
        n = self.rng.randint(1, max_words)
        return " ".join(self.word() for _ in range(n))


def _assemble_doc(
    rng: random.Random,
    fillers: list[str],
    inserts: list[tuple[str, object]],
) -> tuple[list[str], list[tuple[str, str, int]], dict[str, int]]:
    """Lay insert items into filler text; returns tokens, entity
    annotations and keyphrase counts."""
    rng.shuffle(inserts)
    tokens: list[str] = []
    entities: list[tuple[str, str, int]] = []
    keyphrases: dict[str, int] = {}
    for kind, payload in inserts:
        for _ in range(rng.randint(1, 4)):
            tokens.append(rng.choice(fillers))
        if kind == "mention":
            entity_id, mention = payload
            entities.append((entity_id, mention, len(tokens)))
            tokens.extend(mention.split())
        else:
            kp = payload
            keyphrases[kp] = keyphrases.get(kp, 0) + 1
            tokens.extend(kp.split())
    for _ in range(rng.randint(2, 5)):
        tokens.append(rng.choice(fillers))
    return tokens, entities, keyphrases


def synth_corpus(
    out_dir: str | Path,
    seed: int = 42,
    n_entities: int = 20,
    docs_per_entity: int = 40,
    kps_per_entity: int = 60,
    confusable_pairs: int = 6,
    head_docs_per_entity: int = 60,
    n_clusters: int = 6,
) -> tuple[Path, Path]:
    """Generate corpus.jsonl and kb.jsonl; returns their paths.

    Every target entity gets one head competitor sharing a name. With
    confusable_pairs=0 no two entities share any keyphrase.
    """
    if min(n_entities, docs_per_entity, kps_per_entity, head_docs_per_entity) < 1:
        raise ValidationError("generator parameters must be positive")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    forge = _WordForge(rng)

    fillers = [forge.word(1, 2) for _ in range(150)]
    docs: list[dict] = []
    kb: list[EntityRecord] = []

    for pair in range(n_entities):
        shared = forge.word()
        qualifier = forge.word()
        target_id = f"e{pair:02d}_tail"
        head_id = f"e{pair:02d}_head"
        full_name = f"{qualifier} {shared}"

        pool = [forge.phrase() for _ in range(kps_per_entity)]
        cluster_size = max(1, kps_per_entity // n_clusters)
        clusters = [
            pool[i : i + cluster_size] for i in range(0, kps_per_entity, cluster_size)
        ]
        hallmarks = clusters[0][:3]

        companions = [
            [(f"c{pair:02d}_{ci}_{j}", forge.word()) for j in range(6)]
            for ci in range(len(clusters))
        ]
        head_companions = [(f"h{pair:02d}_{j}", forge.word()) for j in range(2)]

        if pair < confusable_pairs:
            head_kps = [forge.phrase() for _ in range(7)] + rng.sample(pool, 3)
        else:
            head_kps = [forge.phrase() for _ in range(10)]

        # half the documents sit in the seed aspect cluster: textual
        # relevance to the seeds then specializes hard on that cluster
        cluster_seq = []
        for j in range(docs_per_entity):
            if j % 2 == 0 or len(clusters) == 1:
                cluster_seq.append(0)
            else:
                cluster_seq.append(1 + ((j // 2) % (len(clusters) - 1)))

        guarantee = list(pool)  # cycled so every pool keyphrase occurs
        for j in range(docs_per_entity):
            ci = cluster_seq[j]
            cluster = clusters[ci]
            n_kp = rng.randint(4, 12)
            chosen: list[str] = []
            if ci == 0:
                chosen.extend(hallmarks)
            if guarantee:
                g = guarantee.pop(0)
                if g not in chosen:
                    chosen.append(g)
            want = max(0, n_kp - len(chosen))
            avail = [k for k in cluster if k not in chosen]
            rng.shuffle(avail)
            chosen.extend(avail[:want])
            if len(chosen) < n_kp and rng.random() < 0.5:
                other = clusters[rng.randrange(len(clusters))]
                extra = [k for k in other if k not in chosen]
                if extra:
                    chosen.append(rng.choice(extra))
            if ci != 0 and rng.random() < 0.15:
                hm = rng.choice(hallmarks)
                if hm not in chosen:
                    chosen.append(hm)
            chosen = chosen[:12]

            inserts: list[tuple[str, object]] = []
            mention = shared if rng.random() < 0.85 else full_name
            inserts.append(("mention", (target_id, mention)))
            for _ in range(rng.randint(0, 2)):
                inserts.append(("mention", (target_id, shared)))
            for kp in chosen:
                for _ in range(rng.randint(1, 2)):
                    inserts.append(("kp", kp))
            # rotate companions so the entity space stays unexhausted
            comps = companions[ci]
            for step in range(2):
                inserts.append(("mention", comps[(j + step) % len(comps)]))
            if rng.random() < 0.4:
                other_ci = rng.randrange(len(clusters))
                inserts.append(("mention", rng.choice(companions[other_ci])))
            if rng.random() < 0.25:
                inserts.append(("kp", forge.phrase()))

            tokens, entities, keyphrases = _assemble_doc(rng, fillers, inserts)
            docs.append(
                {
                    "id": f"d{pair:02d}t{j:03d}",
                    "text": " ".join(tokens),
                    "keyphrases": [
                        {"text": k, "count": c} for k, c in sorted(keyphrases.items())
                    ],
                    "entities": [
                        {"id": e, "mention": m, "offset": o} for e, m, o in entities
                    ],
                }
            )

        head_guarantee = list(head_kps)
        for j in range(head_docs_per_entity):
            inserts = []
            for _ in range(rng.randint(1, 3)):
                inserts.append(("mention", (head_id, shared)))
            chosen = []
            if head_guarantee:
                chosen.append(head_guarantee.pop(0))
            avail = [k for k in head_kps if k not in chosen]
            chosen.extend(rng.sample(avail, min(len(avail), rng.randint(1, 3))))
            for kp in chosen:
                inserts.append(("kp", kp))
            # the uncanonicalized keyphrase surface of head documents is
            # noisy: fresh phrases every document
            for _ in range(rng.randint(5, 10)):
                inserts.append(("kp", forge.phrase()))
            for comp in head_companions:
                if rng.random() < 0.6:
                    inserts.append(("mention", comp))
            tokens, entities, keyphrases = _assemble_doc(rng, fillers, inserts)
            docs.append(
                {
                    "id": f"d{pair:02d}h{j:03d}",
                    "text": " ".join(tokens),
                    "keyphrases": [
                        {"text": k, "count": c} for k, c in sorted(keyphrases.items())
                    ],
                    "entities": [
                        {"id": e, "mention": m, "offset": o} for e, m, o in entities
                    ],
                }
            )

        kb.append(
            EntityRecord(
                entity_id=target_id,
                names=(shared, full_name),
                keyphrases={k: 1.0 / len(pool) for k in sorted(pool)},
            )
        )
        kb.append(
            EntityRecord(
                entity_id=head_id,
                names=(shared,),
                keyphrases={k: 1.0 / len(head_kps) for k in sorted(head_kps)},
            )
        )

    docs.sort(key=lambda d: d["id"])
    corpus_path = out / "corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc, sort_keys=True) + "\n")
    kb_path = out / "kb.jsonl"
    save_kb(kb, kb_path)
    return corpus_path, kb_path


# ---------------------------------------------------------------------------
# experiment runner


def _interleave_log(session) -> list[dict]:
    strategy = session.strategy
    if isinstance(strategy, InterleaveStrategy):
        return list(strategy.state.draw_log)
    return []


def sample_truth_docs(
    index: CorpusIndex,
    workload: list[WorkloadEntry],
    seed: int,
    truth_sample: int,
) -> dict[str, list[tuple[Document, list[str]]]]:
    """Per-entity held-out docs with their gold mentions; deterministic."""
    rng = random.Random(seed)
    picked_by_entity: dict[str, list[tuple[Document, list[str]]]] = {}
    for entry in workload:
        relevant = sorted(entry.truth.relevant_docs)
        sample = (
            relevant
            if len(relevant) <= truth_sample
            else rng.sample(relevant, truth_sample)
        )
        picked = []
        for doc_id in sorted(sample):
            doc = index.get(doc_id)
            mentions = [m for eid, m, _o in doc.entities if eid == entry.entity_id]
            if mentions:
                picked.append((doc, mentions))
        picked_by_entity[entry.entity_id] = picked
    return picked_by_entity


def run_experiment(config: SimConfig) -> Path:
    """Drive every (query, strategy) cell; write results.csv, traces and a
    manifest. Deterministic under a fixed config."""
    index = ingest_corpus(config.corpus)
    workload = load_workload(config.workload)
    kb = load_kb(config.kb)
    out = Path(config.out_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)

    doc_freq = {eid: len(postings) for eid, postings in index.entity_postings.items()}
    truth_docs_by_entity = sample_truth_docs(
        index, workload, config.seed, config.truth_sample
    )

    checkpoints = tuple(k for k in config.checkpoints if k <= config.max_k)
    rows: list[dict] = []
    ceilings: dict[str, float] = {}

    for entry in workload:
        truth_docs = truth_docs_by_entity[entry.entity_id]
        ceiling_rep = EntityRepresentation(
            names=entry.names,
            keyphrases={
                k: 1.0 / len(entry.truth.relevant_keyphrases)
                for k in sorted(entry.truth.relevant_keyphrases)
            },
        )
        ceilings[entry.entity_id] = disambiguation_accuracy(
            entry.entity_id, ceiling_rep, truth_docs, kb, doc_freq
        )

        for strategy_name in config.strategies:
            # the oracle optimizes exactly the measured numerator: the
            # relevant keyphrases a user can still harvest (seeds excluded)
            truth_for_strategy = entry.truth
            if strategy_name == "Ideal":
                truth_for_strategy = GroundTruth(
                    entity_id=entry.entity_id,
                    relevant_keyphrases=entry.truth.relevant_keyphrases
                    - set(entry.seed_keyphrases),
                    relevant_docs=entry.truth.relevant_docs,
                )
            session = start_session(
                index,
                list(entry.names),
                list(entry.seed_keyphrases),
                StrategyConfig(
                    name=strategy_name,
                    truth=truth_for_strategy,
                    static_depth=config.static_depth,
                ),
                mu=config.mu,
            )
            cov_curve: list[float] = []
            eng_curve: list[float] = []
            doc_ids: list[str] = []
            relevant_flags: list[bool] = []
            reps: dict[int, EntityRepresentation] = {}
            exhausted_at = None
            for i in range(1, config.max_k + 1):
                doc_id = next_document(session)
                if doc_id is None:
                    exhausted_at = i
                    break
                doc = index.get(doc_id)
                relevant, accepted = simulated_judge(doc, entry.truth)
                apply_judgment(session, doc_id, relevant, accepted)
                doc_ids.append(doc_id)
                relevant_flags.append(relevant)
                cov_curve.append(
                    coverage_at(session.harvested_keyphrases(), entry.truth)
                )
                eng_curve.append(engagement_at(session.trace))
                if i in checkpoints:
                    reps[i] = finish_session(session)
            final_rep = finish_session(session)
            for k in checkpoints:
                if k not in reps:
                    reps[k] = final_rep

            accuracies = {
                k: disambiguation_accuracy(
                    entry.entity_id, rep, truth_docs, kb, doc_freq
                )
                for k, rep in reps.items()
            }

            last_cov = cov_curve[-1] if cov_curve else 0.0
            last_eng = eng_curve[-1] if eng_curve else 0.0
            for i in range(1, config.max_k + 1):
                padded = i > len(cov_curve)
                rows.append(
                    {
                        "query": entry.entity_id,
                        "strategy": strategy_name,
                        "k": i,
                        "coverage": cov_curve[i - 1] if not padded else last_cov,
                        "engagement": eng_curve[i - 1] if not padded else last_eng,
                        "accuracy": accuracies.get(i, ""),
                        "exhausted": padded,
                    }
                )

            trace = {
                "v": 1,
                "query": entry.entity_id,
                "strategy": strategy_name,
                "names": list(entry.names),
                "seed_keyphrases": list(entry.seed_keyphrases),
                "docs": doc_ids,
                "relevant": relevant_flags,
                "flags": session.trace,
                "coverage": cov_curve,
                "engagement": eng_curve,
                "exhausted_at": exhausted_at,
                "interleave_log": _interleave_log(session),
                "checkpoints": {
                    str(k): {
                        "keyphrases": reps[k].keyphrases,
                        "accuracy": accuracies[k],
                    }
                    for k in checkpoints
                },
            }
            safe_name = strategy_name.replace("(", "_").replace(")", "").replace(",", "_")
            with open(
                out / "traces" / f"{entry.entity_id}__{safe_name}.json",
                "w",
                encoding="utf-8",
            ) as fh:
                json.dump(trace, fh, sort_keys=True, indent=1)

    results_path = out / "results.csv"
    with open(results_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            out_row = dict(row)
            out_row["coverage"] = f"{row['coverage']:.6f}"
            out_row["engagement"] = f"{row['engagement']:.6f}"
            if row["accuracy"] != "":
                out_row["accuracy"] = f"{row['accuracy']:.4f}"
            out_row["exhausted"] = "true" if row["exhausted"] else "false"
            writer.writerow(out_row)

    manifest = {
        "v": 1,
        "corpus": str(config.corpus),
        "workload": str(config.workload),
        "kb": str(config.kb),
        "strategies": list(config.strategies),
        "max_k": config.max_k,
        "checkpoints": list(checkpoints),
        "seed": config.seed,
        "truth_sample": config.truth_sample,
        "ceiling_accuracy": {k: round(v, 4) for k, v in sorted(ceilings.items())},
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
    return results_path


def load_sim_config(path: str | Path) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    known = {f for f in SimConfig.__dataclass_fields__}
    kwargs = {k: v for k, v in raw.items() if k in known}
    if "strategies" in kwargs:
        kwargs["strategies"] = list(kwargs["strategies"])
    if "checkpoints" in kwargs:
        kwargs["checkpoints"] = tuple(kwargs["checkpoints"])
    return SimConfig(**kwargs)
