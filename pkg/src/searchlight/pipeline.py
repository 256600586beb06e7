"""Retrieve, re-rank, explain: the engine behind the result page.

A SearchEngine bundles the immutable artifacts (document store, inverted
index, trained model, embeddings, tokenizer) and exposes the query path:
first-stage retrieval picks candidates, the neural model re-ranks them, and
the result page payload carries two explanations derived from the model
itself: the softmax term weights, and the best-scoring passage of each
document with its character span for snippet and thumbnail rendering.

Document scores at passage granularity follow the max rule: a document
scores as its best passage, and that passage becomes the snippet. Candidates
that cannot be scored (missing from the store, or no non-empty passage) are
dropped from re-ranking with a warning and backfilled behind the model-ranked
results from the first-stage order, so a requested page is filled whenever
enough retrievable documents exist. Backfilled entries carry their
first-stage score, which is not comparable to model scores; they only ever
appear after all model-scored results.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import EngineConfig, MODE_EXPLAINABLE, MODE_REGULAR
from .corpus import DocumentStore, Topic, TokenView, parent_doc_id
from .drmm.histogram import HistogramConfig, build_histograms
from .drmm.model import (
    GATING_EMBEDDING,
    ModelParams,
    forward,
    gating_weights,
    load_model,
)
from .embeddings import EmbeddingStore
from .index import Index, RetrievalConfig
from .tokenizer import Tokenizer, load_stopwords

log = logging.getLogger(__name__)


class UnanswerableQueryError(ValueError):
    """No query term survives preprocessing; nothing can be matched."""


@dataclass(frozen=True)
class RankedResult:
    doc_id: str
    score: float
    rank: int
    best_passage_index: int | None = None
    best_passage_score: float | None = None


@dataclass(frozen=True)
class SerpResult:
    doc_id: str
    title: str
    snippet_text: str
    snippet_char_span: tuple[int, int]
    doc_char_length: int
    score: float
    rank: int
    best_passage_index: int | None = None


@dataclass(frozen=True)
class SerpPayload:
    query_text: str
    term_weights: tuple[tuple[str, float], ...]
    results: tuple[SerpResult, ...]
    query_id: str | None = None

    def to_json_dict(self, mode: str = MODE_EXPLAINABLE) -> dict:
        """Serialize for the UI; regular mode omits explanation fields.

        Omitted means absent, not null: the result objects in both modes
        are identical after stripping the explanation-only fields.
        """
        payload: dict = {"query_text": self.query_text, "mode": mode}
        if self.query_id is not None:
            payload["query_id"] = self.query_id
        if mode == MODE_EXPLAINABLE:
            payload["term_weights"] = [
                {"term": term, "weight": weight} for term, weight in self.term_weights
            ]
        results = []
        for r in self.results:
            row = {
                "doc_id": r.doc_id,
                "title": r.title,
                "snippet_text": r.snippet_text,
                "score": r.score,
                "rank": r.rank,
            }
            if mode == MODE_EXPLAINABLE:
                row["snippet_char_span"] = list(r.snippet_char_span)
                row["doc_char_length"] = r.doc_char_length
                if r.best_passage_index is not None:
                    row["best_passage_index"] = r.best_passage_index
            results.append(row)
        payload["results"] = results
        return payload

    @classmethod
    def from_json_dict(cls, payload: dict) -> "SerpPayload":
        """Inverse of to_json_dict for explainable-mode payloads."""
        results = tuple(
            SerpResult(
                doc_id=row["doc_id"],
                title=row["title"],
                snippet_text=row["snippet_text"],
                snippet_char_span=tuple(row["snippet_char_span"]),
                doc_char_length=row["doc_char_length"],
                score=row["score"],
                rank=row["rank"],
                best_passage_index=row.get("best_passage_index"),
            )
            for row in payload["results"]
        )
        weights = tuple((w["term"], w["weight"]) for w in payload.get("term_weights", ()))
        return cls(
            query_text=payload["query_text"],
            term_weights=weights,
            results=results,
            query_id=payload.get("query_id"),
        )


@dataclass
class SearchEngine:
    store: DocumentStore
    index: Index
    params: ModelParams
    histogram_cfg: HistogramConfig
    gating: str
    embeddings: EmbeddingStore
    tokenizer: Tokenizer
    retrieval: RetrievalConfig
    passage_length: int = 100
    page_size: int = 5
    tokens: TokenView = field(init=False)

    def __post_init__(self):
        self.tokens = TokenView(self.store, self.tokenizer, self.passage_length)

    @classmethod
    def from_config(cls, cfg: EngineConfig) -> "SearchEngine":
        paths = cfg.artifacts
        for name, path in (("index", paths.index), ("model", paths.model), ("store", paths.store)):
            if not path:
                raise ValueError(f"artifacts.{name} is not configured")
        if not cfg.embeddings.path:
            raise ValueError("embeddings.path is not configured")
        params, hist_cfg, gating = load_model(paths.model)
        index = Index.load(paths.index)
        tokenizer = Tokenizer(
            stopwords=load_stopwords(cfg.tokenizer.stopwords), stemming=cfg.tokenizer.stemming
        )
        return cls(
            store=DocumentStore.load(paths.store),
            index=index,
            params=params,
            histogram_cfg=hist_cfg,
            gating=gating,
            embeddings=EmbeddingStore.load_text(
                cfg.embeddings.path, dim=cfg.embeddings.dim, oov_seed=cfg.embeddings.oov_seed
            ),
            tokenizer=tokenizer,
            retrieval=cfg.retrieval.config(passages=index.unit_kind == "passage"),
            passage_length=cfg.passage_length,
            page_size=cfg.service.page_size,
        )

    # -- query-side helpers ---------------------------------------------------

    def _query_text(self, query: Topic | str) -> str:
        return query.title if isinstance(query, Topic) else query

    def _query_id(self, query: Topic | str) -> str | None:
        return query.query_id if isinstance(query, Topic) else None

    def _query_terms(self, query: Topic | str):
        text = self._query_text(query)
        tokenized = self.tokenizer.tokenize(text)
        if not tokenized.tokens:
            raise UnanswerableQueryError(
                f"unanswerable query {text!r}: no terms survive preprocessing"
            )
        return list(tokenized.tokens), tokenized.surface_forms(text)

    def _gating_inputs(self, query_terms: Sequence[str]) -> np.ndarray:
        if self.gating == GATING_EMBEDDING:
            return self.embeddings.matrix(list(query_terms))
        return np.asarray([[self.index.idf(t)] for t in query_terms], dtype=np.float64)

    def _score_unit(self, query_terms, qmat, ginputs, unit_tokens) -> float:
        umat = self.embeddings.matrix(list(unit_tokens))
        hist = build_histograms(query_terms, qmat, unit_tokens, umat, self.histogram_cfg)
        score, _, _ = forward(self.params, hist, ginputs)
        return score

    # -- retrieval and re-ranking ----------------------------------------------

    def retrieve(self, query: Topic | str) -> list[tuple[str, float]]:
        """First-stage candidates: (unit_id, score) by descending score."""
        query_terms, _ = self._query_terms(query)
        return self.index.retrieve_topk(self.retrieval, query_terms)

    def candidate_docs(self, query: Topic | str) -> list[str]:
        """Parent documents of retrieved units, deduplicated in rank order."""
        seen = set()
        docs = []
        for unit_id, _score in self.retrieve(query):
            doc_id = parent_doc_id(unit_id)
            if doc_id not in seen:
                seen.add(doc_id)
                docs.append(doc_id)
        return docs

    def rerank_documents(self, query: Topic | str, candidates: Iterable[str]) -> list[RankedResult]:
        """Re-rank candidates on whole-document histograms (title + body)."""
        query_terms, _ = self._query_terms(query)
        qmat = self.embeddings.matrix(query_terms)
        ginputs = self._gating_inputs(query_terms)
        scored: list[tuple[str, float]] = []
        for doc_id in candidates:
            if doc_id not in self.store:
                log.warning("candidate %s missing from document store; dropped", doc_id)
                continue
            unit_tokens = list(self.tokens.get(doc_id).matching_tokens)
            if not unit_tokens:
                log.warning("candidate %s has no tokens; dropped", doc_id)
                continue
            scored.append((doc_id, self._score_unit(query_terms, qmat, ginputs, unit_tokens)))
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        return [
            RankedResult(doc_id=d, score=s, rank=i)
            for i, (d, s) in enumerate(scored, start=1)
        ]

    def rerank_passages_maxp(
        self, query: Topic | str, candidates: Iterable[str]
    ) -> list[RankedResult]:
        """Re-rank candidates by their best passage score.

        Every passage of every candidate is scored; the document takes the
        maximum, and the earliest passage wins ties so snippets prefer
        earlier content.
        """
        query_terms, _ = self._query_terms(query)
        qmat = self.embeddings.matrix(query_terms)
        ginputs = self._gating_inputs(query_terms)
        scored: list[tuple[str, float, int, float]] = []
        for doc_id in candidates:
            if doc_id not in self.store:
                log.warning("candidate %s missing from document store; dropped", doc_id)
                continue
            passages = self.tokens.get(doc_id).passages
            best_score = None
            best_index = None
            for passage in passages:
                if not passage.tokens:
                    continue
                score = self._score_unit(query_terms, qmat, ginputs, list(passage.tokens))
                if best_score is None or score > best_score:
                    best_score = score
                    best_index = passage.passage_index
            if best_score is None:
                log.warning("candidate %s has no non-empty passage; dropped", doc_id)
                continue
            scored.append((doc_id, best_score, best_index, best_score))
        scored.sort(key=lambda row: (-row[1], row[0]))
        return [
            RankedResult(doc_id=d, score=s, rank=i, best_passage_index=bi, best_passage_score=bs)
            for i, (d, s, bi, bs) in enumerate(scored, start=1)
        ]

    # -- explanations and the result page ---------------------------------------

    def explain_query(self, query: Topic | str) -> list[tuple[str, float]]:
        """Per-term importance weights, labeled with the typed surface forms."""
        query_terms, surfaces = self._query_terms(query)
        g = gating_weights(self.params.w_g, self._gating_inputs(query_terms))
        return list(zip(surfaces, (float(w) for w in g)))

    def build_serp(
        self,
        query: Topic | str,
        ranked: Sequence[RankedResult],
        page_size: int | None = None,
    ) -> SerpPayload:
        """Assemble the payload for the top page_size ranked documents.

        The snippet is the best passage's raw text, sliced from the stored
        body by character span so the UI can re-slice and highlight it. For
        results ranked without passage scores the first passage stands in.
        """
        page_size = self.page_size if page_size is None else page_size
        results = []
        for result in ranked[:page_size]:
            doc = self.store.get(result.doc_id)
            passages = self.tokens.get(result.doc_id).passages
            index = result.best_passage_index
            if index is None and passages:
                index = 0
            if index is not None and index < len(passages):
                span = passages[index].char_span
            else:
                span = (0, 0)
            results.append(
                SerpResult(
                    doc_id=result.doc_id,
                    title=doc.title or result.doc_id,
                    snippet_text=doc.body[span[0] : span[1]],
                    snippet_char_span=span,
                    doc_char_length=len(doc.body),
                    score=result.score,
                    rank=result.rank,
                    best_passage_index=result.best_passage_index,
                )
            )
        return SerpPayload(
            query_text=self._query_text(query),
            term_weights=tuple(self.explain_query(query)),
            results=tuple(results),
            query_id=self._query_id(query),
        )

    def search(self, query: Topic | str, page_size: int | None = None) -> SerpPayload:
        """Full query path: retrieve, re-rank with maxP, build the page."""
        page_size = self.page_size if page_size is None else page_size
        first_stage: dict[str, float] = {}
        candidates: list[str] = []
        for unit_id, score in self.retrieve(query):
            doc_id = parent_doc_id(unit_id)
            if doc_id not in first_stage:
                first_stage[doc_id] = score
                candidates.append(doc_id)
        ranked = list(self.rerank_passages_maxp(query, candidates))
        if len(ranked) < page_size:
            ranked.extend(
                self._backfill(candidates, first_stage, ranked, page_size - len(ranked))
            )
        return self.build_serp(query, ranked, page_size)

    def _backfill(
        self,
        candidates: Sequence[str],
        first_stage: dict[str, float],
        ranked: Sequence[RankedResult],
        want: int,
    ) -> list[RankedResult]:
        # Unscoreable candidates still deserve a listing if stored: append
        # them in first-stage order, carrying their first-stage score.
        present = {r.doc_id for r in ranked}
        filled: list[RankedResult] = []
        next_rank = len(ranked) + 1
        for doc_id in candidates:
            if len(filled) >= want:
                break
            if doc_id in present or doc_id not in self.store:
                continue
            filled.append(
                RankedResult(doc_id=doc_id, score=first_stage[doc_id], rank=next_rank)
            )
            next_rank += 1
        return filled

    # -- run emission ------------------------------------------------------------

    def first_stage_run(self, topics: Iterable[Topic]) -> dict[str, list[tuple[str, float]]]:
        """BM25 run over topic titles; unanswerable topics are skipped."""
        run: dict[str, list[tuple[str, float]]] = {}
        for topic in topics:
            try:
                run[topic.query_id] = self.retrieve(topic)
            except UnanswerableQueryError:
                log.warning("topic %s has no usable terms; skipped", topic.query_id)
        return run

    def rerank_run(self, topics: Iterable[Topic]) -> dict[str, list[tuple[str, float]]]:
        """maxP re-ranked run over candidate documents per topic."""
        run: dict[str, list[tuple[str, float]]] = {}
        for topic in topics:
            try:
                ranked = self.rerank_passages_maxp(topic, self.candidate_docs(topic))
            except UnanswerableQueryError:
                log.warning("topic %s has no usable terms; skipped", topic.query_id)
                continue
            run[topic.query_id] = [(r.doc_id, r.score) for r in ranked]
        return run
