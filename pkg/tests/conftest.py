import json
from pathlib import Path

import pytest

from kpharvest.corpus import CorpusIndex, Document, ingest_corpus
from kpharvest.disambig import load_kb
from kpharvest.simulator import (
    SimConfig,
    generate_workload,
    load_workload,
    run_experiment,
    save_workload,
    synth_corpus,
)

REPO_ROOT = Path(__file__).resolve().parent.parent
BENCHMARK_DIR = REPO_ROOT / "data" / "benchmark"


def write_corpus(path: Path, records: list[dict]) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return path


def doc(doc_id: str, tokens: list[str], keyphrases=None, entities=()) -> Document:
    return Document(
        doc_id=doc_id,
        tokens=tuple(tokens),
        keyphrases=dict(keyphrases or {}),
        entities=tuple(entities),
    )


def index_of(*docs: Document) -> CorpusIndex:
    index = CorpusIndex()
    for d in docs:
        index.add(d)
    return index


@pytest.fixture
def tiny_index() -> CorpusIndex:
    """The two-document corpus used by the LM worked examples."""
    return index_of(doc("d1", ["a", "b", "a"]), doc("d2", ["b", "c"]))


@pytest.fixture(scope="session")
def benchmark_paths():
    assert BENCHMARK_DIR.exists(), "shipped benchmark missing; run `kpharvest synth`"
    return {
        "corpus": BENCHMARK_DIR / "corpus.jsonl",
        "kb": BENCHMARK_DIR / "kb.jsonl",
        "workload": BENCHMARK_DIR / "workload.jsonl",
    }


@pytest.fixture(scope="session")
def benchmark_index(benchmark_paths) -> CorpusIndex:
    return ingest_corpus(benchmark_paths["corpus"])


@pytest.fixture(scope="session")
def benchmark_workload(benchmark_paths):
    return load_workload(benchmark_paths["workload"])


@pytest.fixture(scope="session")
def benchmark_kb(benchmark_paths):
    return load_kb(benchmark_paths["kb"])


@pytest.fixture(scope="session")
def benchmark_run(tmp_path_factory, benchmark_paths):
    """One full 12-strategy simulation over the shipped benchmark,
    regenerated from seed 42 and shared across the acceptance tests."""
    tmp = tmp_path_factory.mktemp("bench")
    corpus_path, kb_path = synth_corpus(tmp, seed=42)
    assert corpus_path.read_bytes() == benchmark_paths["corpus"].read_bytes(), (
        "seed-42 regeneration diverged from the shipped benchmark corpus"
    )
    index = ingest_corpus(corpus_path)
    workload = generate_workload(index, load_kb(kb_path))
    wl_path = tmp / "workload.jsonl"
    save_workload(workload, wl_path)
    out = tmp / "results"
    config = SimConfig(
        corpus=str(corpus_path),
        workload=str(wl_path),
        kb=str(kb_path),
        out_dir=str(out),
        seed=0,
    )
    results_csv = run_experiment(config)
    return {
        "tmp": tmp,
        "config": config,
        "results_csv": results_csv,
        "out": out,
        "index": index,
        "workload": workload,
        "kb_path": kb_path,
    }
