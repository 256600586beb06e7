"""Command-line entry point: build, retrieve, train, evaluate, serve.

Exit codes follow the usual convention: 0 on success, 1 on runtime failure
(missing artifacts, divergent training), 2 on usage or config errors. Every
artifact-producing command writes a manifest next to its main output with
content hashes, the effective config and the seeds involved, so any artifact
can be traced back to its inputs.
"""

from __future__ import annotations

import json
import logging
import os
import sys

import click

from . import trec
from .config import ConfigError, EngineConfig, config_snapshot, load_config
from .corpus import (
    DocumentStore,
    TokenView,
    parent_doc_id,
    passage_unit_id,
    split_passage_unit_id,
    split_passages,
)
from .drmm.histogram import HistogramConfig
from .drmm.model import save_model
from .embeddings import EmbeddingStore
from .drmm.training import (
    FeatureBank,
    Hyperparams,
    TrainingError,
    check_folds,
    cross_validate,
    prepare_training_data,
    write_training_log,
)
from .evaluation import evaluate_run, make_folds
from .index import Index
from .manifest import write_manifest
from .tokenizer import Tokenizer, load_stopwords

log = logging.getLogger(__name__)


def _tokenizer(cfg: EngineConfig) -> Tokenizer:
    return Tokenizer(
        stopwords=load_stopwords(cfg.tokenizer.stopwords),
        stemming=cfg.tokenizer.stemming,
    )


def _config(ctx: click.Context, overrides: dict | None = None) -> EngineConfig:
    try:
        return load_config(ctx.obj.get("config_path"), overrides or {})
    except (ConfigError, OSError, ValueError) as exc:
        raise click.UsageError(f"bad configuration: {exc}") from exc


def _load_artifact(what: str, loader, *args, **kwargs):
    # Corrupt or mismatched artifacts are runtime failures (exit 1), not
    # usage errors; surface the cause without a traceback.
    try:
        return loader(*args, **kwargs)
    except (ValueError, OSError) as exc:
        raise click.ClickException(f"cannot load {what}: {exc}") from exc


@click.group()
@click.option(
    "--config",
    "-c",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="YAML config file; flags override its values.",
)
@click.option("--verbose", "-v", is_flag=True, help="Debug logging.")
@click.pass_context
def main(ctx, config_path, verbose):
    """Explainable two-stage search: BM25 candidates, neural re-ranking."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    ctx.obj = {"config_path": config_path}


@main.group()
def index():
    """Inverted index commands."""


@index.command("build")
@click.argument("collection", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(), help="Index artifact path.")
@click.option("--store", "store_path", type=click.Path(), default=None,
              help="Document store output (default: <out>.store).")
@click.option("--passages", is_flag=True, help="Index passage units instead of documents.")
@click.pass_context
def index_build(ctx, collection, out, store_path, passages):
    """Parse TREC SGML collections and build the index plus document store."""
    cfg = _config(ctx)
    tokenizer = _tokenizer(cfg)
    store_path = store_path or f"{out}.store"

    store = DocumentStore()
    errors: list = []
    for path in collection:
        for file_path in trec.iter_collection_files(path):
            for doc in trec.parse_trec_collection(file_path, errors=errors):
                store.add(doc)
    if errors:
        log.warning("%d malformed document records skipped", len(errors))
    if len(store) == 0:
        raise click.ClickException("no documents parsed from the collection")

    def units():
        for doc_id in store.doc_ids():
            doc = store.get(doc_id)
            title = tokenizer.tokenize(doc.title or "")
            body = tokenizer.tokenize(doc.body)
            if passages:
                for passage in split_passages(doc, tokenizer, cfg.passage_length, tokenized=body):
                    yield passage_unit_id(doc_id, passage.passage_index), passage.tokens
            else:
                yield doc_id, title.tokens + body.tokens

    built = Index.build(units(), unit_kind="passage" if passages else "document")
    built.save(out)
    store.save(store_path)
    write_manifest(
        command="index build",
        artifacts={"index": out, "store": store_path},
        config_snapshot=config_snapshot(cfg),
        extra={"documents": len(store), "units": built.num_units, "parse_errors": len(errors)},
    )
    click.echo(f"indexed {built.num_units} {built.unit_kind} units from {len(store)} documents")


@main.command()
@click.option("--index", "index_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--topics", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path())
@click.option("--k", type=int, default=None, help="Candidates per query (default from config).")
@click.option("--tag", default="searchlight", help="Run tag written to the run file.")
@click.pass_context
def retrieve(ctx, index_path, topics, out, k, tag):
    """BM25 retrieval over a topics file, written as a TREC run."""
    cfg = _config(ctx)
    idx = _load_artifact("index", Index.load, index_path)
    rcfg = cfg.retrieval.config(passages=idx.unit_kind == "passage")
    if k is not None:
        if k < 1:
            raise click.UsageError("--k must be >= 1")
        rcfg = type(rcfg)(k1=rcfg.k1, b=rcfg.b, k=k)
    tokenizer = _tokenizer(cfg)

    run: dict[str, list[tuple[str, float]]] = {}
    for topic in trec.parse_topics(topics):
        terms = tokenizer.tokenize(topic.title).tokens
        if not terms:
            log.warning("topic %s has no usable terms; skipped", topic.query_id)
            continue
        run[topic.query_id] = idx.retrieve_topk(rcfg, list(terms))
    trec.write_run(out, run, tag=tag)
    write_manifest(
        command="retrieve",
        artifacts={"run": out},
        config_snapshot=config_snapshot(cfg),
        extra={"queries": len(run), "k": rcfg.k},
    )
    click.echo(f"retrieved candidates for {len(run)} queries into {out}")


@main.command()
@click.option("--index", "index_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--store", "store_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--run", "run_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--qrels", "qrels_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--topics", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Vector file (default from config).")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--folds-file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON list of query-id lists; default is round-robin assignment.")
@click.option("--seed", type=int, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--n-neg", type=int, default=None)
@click.option("--patience", type=int, default=None)
@click.pass_context
def train(ctx, index_path, store_path, run_path, qrels_path, topics, embeddings_path,
          out_dir, folds_file, seed, epochs, batch_size, n_neg, patience):
    """Cross-validated training: one model per fold, pooled test run, report."""
    overrides = {}
    for key, value in (
        ("training.seed", seed),
        ("training.max_epochs", epochs),
        ("training.batch_size", batch_size),
        ("training.n_neg", n_neg),
        ("training.patience", patience),
        ("embeddings.path", embeddings_path),
    ):
        if value is not None:
            overrides[key] = value
    cfg = _config(ctx, overrides)
    if not cfg.embeddings.path:
        raise click.UsageError("no embeddings path: pass --embeddings or set embeddings.path")

    tokenizer = _tokenizer(cfg)
    idx = _load_artifact("index", Index.load, index_path)
    store = _load_artifact("document store", DocumentStore.load, store_path)
    tokens = TokenView(store, tokenizer, cfg.passage_length)
    embeddings = _load_artifact(
        "embeddings",
        EmbeddingStore.load_text,
        cfg.embeddings.path,
        dim=cfg.embeddings.dim,
        oov_seed=cfg.embeddings.oov_seed,
    )
    run = _load_artifact("run file", trec.read_run, run_path)
    qrels = _load_artifact("qrels", trec.read_qrels, qrels_path)

    query_tokens: dict[str, list[str]] = {}
    for topic in trec.parse_topics(topics):
        query_tokens[topic.query_id] = list(tokenizer.tokenize(topic.title).tokens)
    missing = sorted(set(run) - set(query_tokens))
    if missing:
        log.warning("%d run queries have no topic text and are dropped: %s ...",
                    len(missing), missing[:5])

    def tokens_of(unit_id: str):
        doc_id = parent_doc_id(unit_id)
        entry = tokens.get(doc_id)
        if unit_id == doc_id:
            return entry.matching_tokens
        _, passage_index = split_passage_unit_id(unit_id)
        if passage_index >= len(entry.passages):
            return ()
        return entry.passages[passage_index].tokens

    bank = FeatureBank(
        cfg=HistogramConfig(cfg.histogram.num_bins, cfg.histogram.mode),
        embeddings=embeddings,
        tokens_of=tokens_of,
        gating=cfg.gating,
        idf_of=idx.idf,
        cache_dir=cfg.training_cache_dir,
    )
    retrieved = {qid: [u for u, _ in units] for qid, units in run.items() if qid in query_tokens}
    data = prepare_training_data(query_tokens, retrieved, qrels, bank)

    if folds_file:
        with open(folds_file, encoding="utf-8") as fh:
            folds = json.load(fh)
        try:
            check_folds(folds)
        except ValueError as exc:
            raise click.UsageError(f"bad fold spec: {exc}") from exc
    else:
        folds = make_folds(sorted(data.retrieved))

    os.makedirs(out_dir, exist_ok=True)
    try:
        result = cross_validate(data, folds, cfg.training)
    except (TrainingError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc

    artifacts = {}
    for f, fold_result in enumerate(result.folds):
        model_path = os.path.join(out_dir, f"model_fold{f}.json")
        save_model(model_path, fold_result.params, data.bank.cfg, cfg.gating)
        write_training_log(os.path.join(out_dir, f"train_fold{f}.jsonl"), fold_result.log)
        artifacts[f"model_fold{f}"] = model_path
        click.echo(
            f"fold {f}: best val MAP {fold_result.best_val_map:.4f} "
            f"at epoch {fold_result.best_epoch} "
            f"({fold_result.skipped_queries} queries without pairs)"
        )
    run_out = os.path.join(out_dir, "test_run.txt")
    trec.write_run(run_out, result.test_rankings, tag="searchlight-trained")
    artifacts["test_run"] = run_out

    report = evaluate_run(result.test_rankings, qrels)
    click.echo(f"pooled test MAP over {report.query_count} queries: {report.map:.4f}")
    write_manifest(
        command="train",
        artifacts=artifacts,
        config_snapshot=config_snapshot(cfg),
        seeds={"training": cfg.training.seed},
        extra={"pooled_test_map": report.map, "folds": len(result.folds)},
    )


@main.command()
@click.option("--run", "run_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--qrels", "qrels_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--k", type=int, default=20, show_default=True, help="Cutoff for P@k and nDCG@k.")
@click.option("--jsonl", "jsonl_out", type=click.Path(), default=None,
              help="Also write machine-readable per-query lines here.")
def evaluate(run_path, qrels_path, k, jsonl_out):
    """Score a TREC run against qrels (AP, P@k, nDCG@k)."""
    if k < 1:
        raise click.UsageError("--k must be >= 1")
    run = _load_artifact("run file", trec.read_run, run_path)
    qrels = _load_artifact("qrels", trec.read_qrels, qrels_path)
    report = evaluate_run(run, qrels, k)
    click.echo(report.as_table())
    if report.excluded:
        click.echo(f"excluded (no judgments or no relevant docs): {len(report.excluded)}")
    if jsonl_out:
        with open(jsonl_out, "w", encoding="utf-8") as fh:
            fh.write(report.as_jsonl())


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--index", "index_path", type=click.Path(), default=None)
@click.option("--model", "model_path", type=click.Path(), default=None)
@click.option("--store", "store_path", type=click.Path(), default=None)
@click.option("--embeddings", "embeddings_path", type=click.Path(), default=None)
@click.option("--ui-dir", type=click.Path(), default=None)
@click.pass_context
def serve(ctx, host, port, index_path, model_path, store_path, embeddings_path, ui_dir):
    """Run the HTTP service over built artifacts."""
    overrides = {}
    for key, value in (
        ("service.host", host),
        ("service.port", port),
        ("artifacts.index", index_path),
        ("artifacts.model", model_path),
        ("artifacts.store", store_path),
        ("embeddings.path", embeddings_path),
        ("service.ui_dir", ui_dir),
    ):
        if value is not None:
            overrides[key] = value
    cfg = _config(ctx, overrides)

    # Artifact presence is a runtime concern, not a usage error.
    required = {
        "index": cfg.artifacts.index,
        "model": cfg.artifacts.model,
        "store": cfg.artifacts.store,
        "embeddings": cfg.embeddings.path,
    }
    for name, path in required.items():
        if not path:
            raise click.ClickException(f"no {name} path configured")
        if not os.path.exists(path):
            raise click.ClickException(f"{name} artifact not found: {path}")
    if cfg.service.ui_dir and not os.path.isdir(cfg.service.ui_dir):
        raise click.ClickException(f"ui directory not found: {cfg.service.ui_dir}")

    import uvicorn

    from .service import create_app

    app = create_app(cfg)
    uvicorn.run(app, host=cfg.service.host, port=cfg.service.port, log_level="info")


if __name__ == "__main__":
    main()
