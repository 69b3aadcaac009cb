import random

import pytest

from kpharvest.disambig import (
    CandidateSet,
    EntityRecord,
    disambiguate,
    disambiguation_accuracy,
    load_kb,
    save_kb,
)
from kpharvest.errors import UndefinedMetricError, ValidationError
from kpharvest.session import EntityRepresentation

from conftest import doc


def cand(*entries):
    return CandidateSet(mention="m", candidates=tuple(entries))


def test_single_candidate_wins():
    assert disambiguate({"k": 1}, cand(("only", {}, 1.0))) == "only"


def test_overlap_dominance():
    cs = cand(
        ("a", {"k1": 0.5, "k2": 0.5}, 0.1),
        ("b", {"k9": 1.0}, 0.9),
    )
    assert disambiguate({"k1": 1, "k2": 1}, cs) == "a"


def test_prior_tiebreak_when_no_overlap():
    cs = cand(("a", {"x": 1.0}, 0.1), ("b", {"y": 1.0}, 0.9))
    assert disambiguate({"k": 3}, cs) == "b"


def test_id_tiebreak_when_all_equal():
    cs = cand(("b", {}, 0.5), ("a", {}, 0.5))
    assert disambiguate({"k": 1}, cs) == "a"


def test_candidate_set_requires_candidates():
    with pytest.raises(ValidationError):
        CandidateSet(mention="m", candidates=())


def test_candidate_set_rejects_negative_prior():
    with pytest.raises(ValidationError):
        cand(("a", {}, -0.1))


def test_weight_boost_never_flips_away():
    rng = random.Random(1)
    for _ in range(200):
        context = {f"k{i}": rng.randint(1, 3) for i in range(rng.randint(1, 5))}
        reps = []
        for name in ("a", "b", "c"):
            rep = {
                kp: rng.uniform(0.05, 1.0)
                for kp in context
                if rng.random() < 0.5
            }
            reps.append((name, rep, rng.random()))
        cs = CandidateSet(mention="m", candidates=tuple(reps))
        winner = disambiguate(context, cs)
        boosted = []
        for name, rep, prior in reps:
            rep2 = dict(rep)
            if name == winner:
                shared = [kp for kp in rep2 if kp in context]
                if shared:
                    rep2[shared[0]] += 1.0
            boosted.append((name, rep2, prior))
        assert disambiguate(context, CandidateSet(mention="m", candidates=tuple(boosted))) == winner


def test_uniform_rescaling_invariance():
    rng = random.Random(2)
    for _ in range(100):
        context = {f"k{i}": rng.randint(1, 3) for i in range(4)}
        reps = [
            (
                name,
                {kp: rng.uniform(0.1, 1.0) for kp in context if rng.random() < 0.6},
                rng.random(),
            )
            for name in ("a", "b")
        ]
        scale = rng.uniform(0.1, 10.0)
        scaled = [(n, {k: w * scale for k, w in r.items()}, p) for n, r, p in reps]
        assert disambiguate(context, cand(*reps)) == disambiguate(context, cand(*scaled))


def make_truth_doc(doc_id, kps, mentions):
    entities = [("target", m, 0) for m in mentions]
    return doc(doc_id, ["w"] * 3, {k: 1 for k in kps}, entities)


def test_accuracy_no_competitor_sharing_mention():
    truth_docs = [
        (make_truth_doc("d1", ["k1"], ["solo name"]), ["solo name"]),
        (make_truth_doc("d2", ["k2"], ["solo name"]), ["solo name"]),
    ]
    kb = [EntityRecord("other", ("different",), {"z": 1.0})]
    rep = EntityRepresentation(names=("solo name",), keyphrases={})
    acc = disambiguation_accuracy("target", rep, truth_docs, kb, {"target": 1, "other": 5})
    assert acc == 100.0


def test_accuracy_competitor_beats_empty_representation():
    truth_docs = [
        (make_truth_doc("d1", ["k1", "k2"], ["shared"]), ["shared"]),
        (make_truth_doc("d2", ["k1"], ["shared"]), ["shared"]),
    ]
    kb = [EntityRecord("head", ("shared",), {"k1": 0.5, "other": 0.5})]
    freq = {"target": 2, "head": 10}
    empty = EntityRepresentation(names=("shared",), keyphrases={})
    harvested = EntityRepresentation(names=("shared",), keyphrases={"k1": 0.5, "k2": 0.5})
    assert disambiguation_accuracy("target", empty, truth_docs, kb, freq) == 0.0
    assert disambiguation_accuracy("target", harvested, truth_docs, kb, freq) == 0.0
    stronger = EntityRepresentation(
        names=("shared",), keyphrases={"k1": 0.6, "k2": 0.4}
    )
    assert disambiguation_accuracy("target", stronger, truth_docs, kb, freq) == 100.0


def test_accuracy_requires_mentions():
    with pytest.raises(UndefinedMetricError):
        disambiguation_accuracy(
            "target",
            EntityRepresentation(names=("n",), keyphrases={}),
            [],
            [],
            {},
        )


def test_kb_round_trip(tmp_path):
    records = [
        EntityRecord("e2", ("name b",), {"k": 0.5, "j": 0.5}),
        EntityRecord("e1", ("name a", "other"), {"x": 1.0}),
    ]
    path = tmp_path / "kb.jsonl"
    save_kb(records, path)
    loaded = load_kb(path)
    assert loaded == sorted(records, key=lambda r: r.entity_id)
