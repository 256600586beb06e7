"""Shared fixtures: tokenizers, synthetic corpora, and engine assembly.

Also collects the acceptance-suite outcomes and prints one PASS/FAIL line
per criterion at the end of the run.
"""

from __future__ import annotations

import numpy as np
import pytest

from searchlight.corpus import DocumentStore, RawDocument, Topic
from searchlight.drmm.histogram import HistogramConfig
from searchlight.drmm.model import GATING_EMBEDDING, init_params
from searchlight.embeddings import EmbeddingStore
from searchlight.index import Index, RetrievalConfig
from searchlight.pipeline import SearchEngine
from searchlight.tokenizer import Tokenizer

# -- acceptance reporting ------------------------------------------------------

_acceptance_results: list[tuple[str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if call.when != "call" or item.fspath.basename != "test_acceptance.py":
        return
    doc = (item.obj.__doc__ or item.name).strip().splitlines()[0]
    if report.passed:
        status = "PASS"
    elif report.skipped:
        status = "SKIP"
    else:
        status = "FAIL"
    _acceptance_results.append((status, doc))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for status, doc in _acceptance_results:
        terminalreporter.write_line(f"[{status}] {doc}")


# -- tokenizers ----------------------------------------------------------------


@pytest.fixture(scope="session")
def tok() -> Tokenizer:
    """Default tokenizer: bundled stopwords, stemming on."""
    return Tokenizer()


@pytest.fixture(scope="session")
def plain_tok() -> Tokenizer:
    """No stopwords, no stemming; for corpora with controlled vocabularies."""
    return Tokenizer(stopwords=frozenset(), stemming=False)


# -- synthetic embeddings ------------------------------------------------------


@pytest.fixture(scope="session")
def synth_embeddings() -> EmbeddingStore:
    """Every term out-of-vocabulary: deterministic random unit vectors."""
    return EmbeddingStore(dim=16, vectors={}, oov_seed=3)


# -- planted corpus ------------------------------------------------------------
# 20 queries, 10 documents each: 5 relevant carry both query terms, 5
# judged non-relevant carry only the first. Filler terms pad every body.

PLANTED_QUERIES = 20
PLANTED_REL = 5
PLANTED_NONREL = 5


def planted_query_id(i: int) -> str:
    return f"q{i:02d}"


def planted_query_text(i: int) -> str:
    return f"alpha{i} beta{i}"


def _planted_body(rng: np.random.Generator, planted: list[str], length: int = 40) -> str:
    filler = [f"filler{int(k)}" for k in rng.integers(0, 200, size=length - len(planted))]
    words = planted + filler
    order = rng.permutation(len(words))
    return " ".join(words[j] for j in order)


def build_planted_corpus() -> tuple[DocumentStore, list[Topic], dict[str, dict[str, int]]]:
    rng = np.random.Generator(np.random.PCG64(99))
    store = DocumentStore()
    topics = []
    qrels: dict[str, dict[str, int]] = {}
    for i in range(PLANTED_QUERIES):
        qid = planted_query_id(i)
        topics.append(Topic(query_id=qid, title=planted_query_text(i), description=""))
        qrels[qid] = {}
        for j in range(PLANTED_REL):
            doc_id = f"REL-{i:02d}-{j}"
            planted = [f"alpha{i}"] * int(rng.integers(2, 5)) + [f"beta{i}"] * int(
                rng.integers(2, 5)
            )
            store.add(RawDocument(doc_id=doc_id, body=_planted_body(rng, planted)))
            qrels[qid][doc_id] = 1
        for j in range(PLANTED_NONREL):
            doc_id = f"NON-{i:02d}-{j}"
            planted = [f"alpha{i}"] * int(rng.integers(2, 5))
            store.add(RawDocument(doc_id=doc_id, body=_planted_body(rng, planted)))
            qrels[qid][doc_id] = 0
    return store, topics, qrels


@pytest.fixture(scope="session")
def planted_corpus():
    return build_planted_corpus()


# -- tiny engine ---------------------------------------------------------------


def doc_units(store: DocumentStore, tokenizer: Tokenizer):
    for doc_id in store.doc_ids():
        doc = store.get(doc_id)
        title = tokenizer.tokenize(doc.title or "")
        body = tokenizer.tokenize(doc.body)
        yield doc_id, title.tokens + body.tokens


def make_engine(
    store: DocumentStore,
    tokenizer: Tokenizer,
    embeddings: EmbeddingStore,
    seed: int = 7,
    k: int = 50,
    passage_length: int = 100,
    params=None,
) -> SearchEngine:
    index = Index.build(doc_units(store, tokenizer), unit_kind="document")
    cfg = HistogramConfig()
    if params is None:
        params = init_params(cfg.num_bins, embeddings.dim, seed=seed)
    return SearchEngine(
        store=store,
        index=index,
        params=params,
        histogram_cfg=cfg,
        gating=GATING_EMBEDDING,
        embeddings=embeddings,
        tokenizer=tokenizer,
        retrieval=RetrievalConfig(k=k),
        passage_length=passage_length,
    )


@pytest.fixture()
def small_store(plain_tok) -> DocumentStore:
    store = DocumentStore()
    store.add(
        RawDocument(
            doc_id="D1",
            title="winter storms",
            body="heavy snow fell across the north while winds grew stronger overnight",
        )
    )
    store.add(
        RawDocument(
            doc_id="D2",
            title="summer drought",
            body="dry fields and heat waves covered the south for weeks on end",
        )
    )
    store.add(
        RawDocument(
            doc_id="D3",
            title="flood recovery",
            body="rivers crested and flood water reached towns near the delta region",
        )
    )
    return store
