"""Command-line entry points: ingest, synth, workload, simulate,
eval-disambig, serve."""

from __future__ import annotations

import json
import os
import sys
from collections import defaultdict
from pathlib import Path

import click

from .corpus import ingest_corpus, load_index, save_index
from .disambig import disambiguation_accuracy, load_kb
from .errors import KpharvestError
from .session import EntityRepresentation
from .simulator import (
    SimConfig,
    generate_workload,
    load_sim_config,
    load_workload,
    run_experiment,
    sample_truth_docs,
    save_workload,
    synth_corpus,
)


@click.group()
def main():
    """Interactive keyphrase harvesting for emerging entities."""


def _fail(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@main.command()
@click.argument("corpus", type=click.Path(exists=True, dir_okay=False))
@click.argument("index_dir", type=click.Path(file_okay=False))
def ingest(corpus, index_dir):
    """Ingest a JSONL corpus into an index directory."""
    try:
        index = ingest_corpus(corpus)
        save_index(index, index_dir)
    except KpharvestError as exc:
        _fail(str(exc))
    click.echo(f"ingested {len(index.documents)} documents into {index_dir}")


@main.command()
@click.option("--seed", default=42, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--entities", default=20, show_default=True, type=int)
@click.option("--docs-per-entity", default=40, show_default=True, type=int)
@click.option("--kps-per-entity", default=60, show_default=True, type=int)
@click.option("--confusable", default=6, show_default=True, type=int)
@click.option("--head-docs", default=60, show_default=True, type=int)
def synth(seed, out_dir, entities, docs_per_entity, kps_per_entity, confusable, head_docs):
    """Generate a synthetic benchmark corpus and reference KB."""
    try:
        corpus_path, kb_path = synth_corpus(
            out_dir,
            seed=seed,
            n_entities=entities,
            docs_per_entity=docs_per_entity,
            kps_per_entity=kps_per_entity,
            confusable_pairs=confusable,
            head_docs_per_entity=head_docs,
        )
    except KpharvestError as exc:
        _fail(str(exc))
    click.echo(f"wrote {corpus_path} and {kb_path}")


@main.command()
@click.argument("index_dir", type=click.Path(exists=True))
@click.argument("kb", type=click.Path(exists=True, dir_okay=False))
@click.option("--max-df", default=2000, show_default=True, type=int)
@click.option("--min-kps", default=50, show_default=True, type=int)
@click.option("--allow-unambiguous", is_flag=True, default=False)
@click.option("--out", "out_path", type=click.Path(dir_okay=False))
def workload(index_dir, kb, max_df, min_kps, allow_unambiguous, out_path):
    """Select long-tail ambiguous entities with enough in-collection keyphrases."""
    try:
        index = _load_any_index(index_dir)
        entries = generate_workload(
            index,
            load_kb(kb),
            max_doc_freq=max_df,
            min_kps=min_kps,
            require_ambiguous=not allow_unambiguous,
        )
    except KpharvestError as exc:
        _fail(str(exc))
    if out_path:
        save_workload(entries, out_path)
        click.echo(f"wrote {len(entries)} workload entries to {out_path}")
    else:
        for e in entries:
            click.echo(
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
            )


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
def simulate(config_path):
    """Run the batch user-simulation experiment from a JSON config."""
    try:
        config = load_sim_config(config_path)
        results = run_experiment(config)
    except KpharvestError as exc:
        _fail(str(exc))
    click.echo(f"wrote {results}")


@main.command("eval-disambig")
@click.argument("results_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("kb", type=click.Path(exists=True, dir_okay=False))
def eval_disambig(results_dir, kb):
    """Recompute disambiguation accuracy from saved session traces."""
    results = Path(results_dir)
    try:
        with open(results / "manifest.json", encoding="utf-8") as fh:
            manifest = json.load(fh)
        index = ingest_corpus(manifest["corpus"])
        entries = load_workload(manifest["workload"])
        kb_records = load_kb(kb)
        truth_docs = sample_truth_docs(
            index, entries, manifest["seed"], manifest["truth_sample"]
        )
        doc_freq = {
            eid: len(postings) for eid, postings in index.entity_postings.items()
        }
        by_entity = {e.entity_id: e for e in entries}
        sums: dict[tuple[str, int], list[float]] = defaultdict(list)
        for trace_path in sorted((results / "traces").glob("*.json")):
            with open(trace_path, encoding="utf-8") as fh:
                trace = json.load(fh)
            entry = by_entity.get(trace["query"])
            if entry is None:
                continue
            for k, payload in trace["checkpoints"].items():
                rep = EntityRepresentation(
                    names=entry.names, keyphrases=payload["keyphrases"]
                )
                acc = disambiguation_accuracy(
                    entry.entity_id,
                    rep,
                    truth_docs[entry.entity_id],
                    kb_records,
                    doc_freq,
                )
                sums[(trace["strategy"], int(k))].append(acc)
    except (KpharvestError, OSError, KeyError) as exc:
        _fail(str(exc))
    click.echo("strategy,k,mean_accuracy")
    for (strategy, k), values in sorted(sums.items()):
        click.echo(f"{strategy},{k},{sum(values) / len(values):.4f}")


def _load_any_index(path: str):
    p = Path(path)
    if p.is_dir():
        return load_index(p)
    return ingest_corpus(p)


@main.command()
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--port", default=None, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--workload", "workload_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--ui", "ui_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--snapshots", "snapshot_dir", type=click.Path(file_okay=False))
@click.option("--strict-concurrency", is_flag=True, default=False)
def serve(index_path, port, host, workload_path, ui_dir, snapshot_dir, strict_concurrency):
    """Serve the interactive session API (and optionally the web UI)."""
    import uvicorn

    from .service import create_app

    try:
        index = _load_any_index(index_path)
        entries = load_workload(workload_path) if workload_path else None
    except KpharvestError as exc:
        _fail(str(exc))
    if port is None:
        port = int(os.environ.get("KPHARVEST_PORT", "8000"))
    app = create_app(
        index,
        workload=entries,
        corpus_name=Path(index_path).stem,
        strict_concurrency=strict_concurrency,
        snapshot_dir=snapshot_dir,
        ui_dir=ui_dir,
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
