import random
from itertools import combinations

from kpharvest.diversify import (
    AspectSpace,
    CoveredSet,
    aspect_of,
    diversify_with_feedback,
    greedy_diverse_rank,
    update_covered,
)
from kpharvest.session import apply_judgment, start_session
from kpharvest.strategies import StrategyConfig

from conftest import doc, index_of


def kp_doc(doc_id, aspects):
    return doc(doc_id, ["n"] + list(aspects), {a: 1 for a in aspects})


def test_aspect_of_keyphrase_space():
    d = kp_doc("d", ["k1", "k2"])
    assert aspect_of(d, AspectSpace.KEYPHRASE) == {"k1", "k2"}


def test_aspect_of_entity_space():
    d = doc("d", ["x"], entities=[("e7", "x", 0)])
    assert aspect_of(d, AspectSpace.ENTITY) == {"e7"}


def test_aspect_of_entity_space_empty():
    d = doc("d", ["x"])
    assert aspect_of(d, AspectSpace.ENTITY) == set()


def test_greedy_example_with_brute_force_confirmation():
    documents = {
        "d1": kp_doc("d1", ["a", "b"]),
        "d2": kp_doc("d2", ["b", "c", "d"]),
        "d3": kp_doc("d3", ["e"]),
    }
    picks = greedy_diverse_rank(
        documents, {"d1", "d2", "d3"}, AspectSpace.KEYPHRASE, CoveredSet(), budget=2
    )
    assert picks == [("d2", 3.0), ("d1", 1.0)]
    # brute force over all size-2 subsets: greedy attains the optimum here
    best = max(
        len(
            aspect_of(documents[x], AspectSpace.KEYPHRASE)
            | aspect_of(documents[y], AspectSpace.KEYPHRASE)
        )
        for x, y in combinations(documents, 2)
    )
    assert picks[0][1] + picks[1][1] == best == 4


def test_greedy_single_candidate():
    documents = {"only": kp_doc("only", ["a"])}
    picks = greedy_diverse_rank(
        documents, {"only"}, AspectSpace.KEYPHRASE, CoveredSet(), budget=3
    )
    assert [d for d, _ in picks] == ["only"]


def test_greedy_fully_covered_emits_id_order():
    documents = {
        "z": kp_doc("z", ["a"]),
        "m": kp_doc("m", ["b"]),
        "a": kp_doc("a", ["a", "b"]),
    }
    picks = greedy_diverse_rank(
        documents,
        set(documents),
        AspectSpace.KEYPHRASE,
        CoveredSet({"a", "b"}),
        budget=3,
    )
    assert [d for d, _ in picks] == ["a", "m", "z"]
    assert all(score == 0.0 for _d, score in picks)


def test_update_covered_union():
    covered = CoveredSet({"a"})
    assert update_covered(covered, kp_doc("d", ["a", "b"]), AspectSpace.KEYPHRASE).aspects == {"a", "b"}


def test_update_covered_ignores_relevance():
    # the caller never passes relevance: aspects of any judged doc count
    covered = update_covered(CoveredSet(), kp_doc("d", ["c"]), AspectSpace.KEYPHRASE)
    assert covered.aspects == {"c"}


def test_update_covered_no_aspects():
    covered = CoveredSet({"a"})
    assert update_covered(covered, doc("d", ["x"]), AspectSpace.ENTITY).aspects == {"a"}


def random_instance(rng):
    n_docs = rng.randint(1, 12)
    n_aspects = rng.randint(1, 10)
    universe = [f"a{i}" for i in range(n_aspects)]
    documents = {}
    for i in range(n_docs):
        take = rng.randint(0, n_aspects)
        documents[f"d{i:02d}"] = kp_doc(f"d{i:02d}", rng.sample(universe, take) or ["filler"])
    return documents


def brute_force_optimum_per_budget(documents, max_budget):
    """Exhaustive max coverage for every budget in one sweep."""
    ids = sorted(documents)
    aspects = {d: aspect_of(documents[d], AspectSpace.KEYPHRASE) for d in ids}
    best = [0] * (max_budget + 1)
    for size in range(1, max_budget + 1):
        if size > len(ids):
            best[size] = best[size - 1]
            continue
        top = 0
        for combo in combinations(ids, size):
            union = set()
            for d in combo:
                union |= aspects[d]
            top = max(top, len(union))
        best[size] = max(top, best[size - 1])
    return best


def test_prefix_consistency_and_approximation_bound():
    rng = random.Random(11)
    bound = 1 - 1 / 2.718281828459045
    for _ in range(60):
        documents = random_instance(rng)
        ids = set(documents)
        full = greedy_diverse_rank(
            documents, ids, AspectSpace.KEYPHRASE, CoveredSet(), budget=len(ids)
        )
        opt = brute_force_optimum_per_budget(documents, len(ids))
        for budget in range(1, len(ids) + 1):
            prefix = greedy_diverse_rank(
                documents, ids, AspectSpace.KEYPHRASE, CoveredSet(), budget=budget
            )
            assert prefix == full[:budget]
            covered = set()
            for d, _ in prefix:
                covered |= aspect_of(documents[d], AspectSpace.KEYPHRASE)
            assert len(covered) >= bound * opt[budget] - 1e-9


def test_greedy_determinism():
    rng = random.Random(3)
    documents = random_instance(rng)
    ids = set(documents)
    first = greedy_diverse_rank(documents, ids, AspectSpace.KEYPHRASE, CoveredSet(), 5)
    second = greedy_diverse_rank(documents, ids, AspectSpace.KEYPHRASE, CoveredSet(), 5)
    assert repr(first) == repr(second)


def feedback_index():
    return index_of(
        kp_doc("d1", ["a", "b"]),
        kp_doc("d2", ["c"]),
        kp_doc("d3", ["a"]),
    )


def test_diversify_with_feedback_fresh_session_matches_plain_head():
    index = feedback_index()
    session = start_session(index, ["n"], [], StrategyConfig(name="Div_Kp-Feedback"))
    head = diversify_with_feedback(session, AspectSpace.KEYPHRASE)
    plain = greedy_diverse_rank(
        index.documents, set(index.documents), AspectSpace.KEYPHRASE, CoveredSet(), 1
    )
    assert head == plain[0][0] == "d1"


def test_diversify_with_feedback_prefers_uncovered():
    index = feedback_index()
    session = start_session(index, ["n"], [], StrategyConfig(name="Div_Kp-Feedback"))
    session.pending = "d1"
    apply_judgment(session, "d1", False, set())  # covers {a, b}
    head = diversify_with_feedback(session, AspectSpace.KEYPHRASE)
    assert head == "d2"  # gain 1 beats d3's gain 0


def test_diversify_with_feedback_all_covered_takes_lowest_id():
    index = index_of(kp_doc("db", ["a"]), kp_doc("da", ["a"]), kp_doc("dc", ["a", "b"]))
    session = start_session(index, ["n"], [], StrategyConfig(name="Div_Kp-Feedback"))
    session.pending = "dc"
    apply_judgment(session, "dc", False, set())
    head = diversify_with_feedback(session, AspectSpace.KEYPHRASE)
    assert head == "da"


def test_diversify_with_feedback_exhausted_pool():
    index = index_of(kp_doc("d1", ["a"]))
    session = start_session(index, ["n"], [], StrategyConfig(name="Div_Kp-Feedback"))
    session.pending = "d1"
    apply_judgment(session, "d1", False, set())
    assert diversify_with_feedback(session, AspectSpace.KEYPHRASE) is None


def test_covered_set_monotone_across_session_replay():
    index = feedback_index()
    session = start_session(index, ["n"], [], StrategyConfig(name="Div_Kp"))
    sizes = [len(session.covered_aspects)]
    from kpharvest.session import next_document

    while True:
        doc_id = next_document(session)
        if doc_id is None:
            break
        apply_judgment(session, doc_id, False, set())
        sizes.append(len(session.covered_aspects))
    assert sizes == sorted(sizes)
