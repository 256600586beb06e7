"""Pairwise training loop: qrels filtering, pair sampling, folds, early stopping.

Training data comes from first-stage retrieval: only judged units that were
actually retrieved participate. A relevant unit is paired with negatives
sampled from the same query's retrieved non-relevant units. At passage
granularity a passage inherits the relevance label of its parent document.

Everything here is deterministic given the seed: queries are visited in
sorted order, sampling and epoch shuffling use seeded generators, and no
step depends on dict iteration of externally ordered data. Two runs with the
same inputs and seed produce bitwise-identical parameters.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from ..corpus import parent_doc_id
from ..evaluation import average_precision
from .adadelta import init_state, adadelta_step
from .histogram import HistogramConfig, build_histograms
from .model import (
    GATING_EMBEDDING,
    GATING_IDF,
    GATING_VARIANTS,
    PARAM_FIELDS,
    ModelParams,
    TrainingPair,
    _mlp,
    backward,
    gating_weights,
    init_params,
    zeros_like_params,
)

logger = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Hyperparams:
    batch_size: int = 32
    n_neg: int = 4
    max_epochs: int = 50
    patience: int = 5
    rho: float = 0.95
    epsilon: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1 or self.n_neg < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ValueError("batch_size, n_neg, max_epochs and patience must all be >= 1")


def filter_qrels(
    qrels: dict[str, dict[str, int]], retrieved: dict[str, Iterable[str]]
) -> dict[str, dict[str, int]]:
    """Keep only judgments whose (query, doc) pair was retrieved.

    `retrieved` maps query_id to retrieved doc ids. Queries judged but never
    retrieved for lose all their rows, with a warning.
    """
    filtered: dict[str, dict[str, int]] = {}
    for qid in sorted(qrels):
        if qid not in retrieved:
            logger.warning("query %s has judgments but no retrieval results; dropped", qid)
            continue
        docs = set(retrieved[qid])
        rows = {doc: grade for doc, grade in qrels[qid].items() if doc in docs}
        if rows:
            filtered[qid] = rows
    return filtered


def sample_pair_ids(
    filtered_qrels: dict[str, dict[str, int]],
    retrieved: dict[str, Sequence[str]],
    seed: int,
    n_neg: int = 4,
) -> tuple[list[tuple[str, str, str]], int]:
    """Sample (query_id, pos_unit, neg_unit) triples; returns (pairs, skipped).

    Positives are retrieved units whose parent document has grade >= 1 in
    the filtered qrels; negatives have grade 0 (explicitly judged
    non-relevant). Each positive draws up to n_neg negatives uniformly
    without replacement. Unjudged units never enter pairs. `skipped` counts
    queries that produced no pair.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    pairs: list[tuple[str, str, str]] = []
    skipped = 0
    for qid in sorted(retrieved):
        grades = filtered_qrels.get(qid, {})
        pos_units = [u for u in retrieved[qid] if grades.get(parent_doc_id(u), 0) >= 1]
        neg_units = [u for u in retrieved[qid] if grades.get(parent_doc_id(u)) == 0]
        if not pos_units or not neg_units:
            skipped += 1
            continue
        for pos in pos_units:
            take = min(n_neg, len(neg_units))
            chosen = rng.choice(len(neg_units), size=take, replace=False)
            for j in sorted(chosen.tolist()):
                pairs.append((qid, pos, neg_units[j]))
    return pairs, skipped


# -- feature bank -------------------------------------------------------------


@dataclass
class QueryFeatures:
    """Histograms for one query against its candidate units.

    histograms has shape (num_units, M, num_bins); gating_inputs has shape
    (M, gating_dim) and is shared by every unit of the query.
    """

    query_id: str
    unit_ids: list[str]
    histograms: np.ndarray
    gating_inputs: np.ndarray
    _pos: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self._pos = {u: i for i, u in enumerate(self.unit_ids)}

    def histogram_for(self, unit_id: str) -> np.ndarray:
        return self.histograms[self._pos[unit_id]]


class FeatureBank:
    """Computes and caches per-query histogram tensors.

    Embeddings are frozen, so a (query, unit) histogram never changes; each
    query's tensor is built once and memoized, optionally persisted under
    cache_dir as one .npz per query (written atomically via temp file +
    rename). Cache entries self-describe their inputs and are recomputed on
    any mismatch.
    """

    def __init__(
        self,
        cfg: HistogramConfig,
        embeddings,
        tokens_of: Callable[[str], Sequence[str]],
        gating: str = GATING_EMBEDDING,
        idf_of: Callable[[str], float] | None = None,
        cache_dir: str | None = None,
    ):
        if gating not in GATING_VARIANTS:
            raise ValueError(f"unknown gating variant {gating!r}")
        if gating == GATING_IDF and idf_of is None:
            raise ValueError("idf gating needs an idf_of callable")
        self.cfg = cfg
        self.embeddings = embeddings
        self.tokens_of = tokens_of
        self.gating = gating
        self.idf_of = idf_of
        self.cache_dir = cache_dir
        self.gating_dim = embeddings.dim if gating == GATING_EMBEDDING else 1
        self._memo: dict[str, QueryFeatures] = {}
        if cache_dir:
            os.makedirs(cache_dir, exist_ok=True)

    def gating_inputs(self, query_tokens: Sequence[str]) -> np.ndarray:
        if self.gating == GATING_EMBEDDING:
            return self.embeddings.matrix(list(query_tokens))
        return np.asarray([[self.idf_of(t)] for t in query_tokens], dtype=np.float64)

    def features(
        self, query_id: str, query_tokens: Sequence[str], unit_ids: Sequence[str]
    ) -> QueryFeatures:
        unit_ids = list(unit_ids)
        memo = self._memo.get(query_id)
        if memo is not None and memo.unit_ids == unit_ids:
            return memo
        feats = self._load_cached(query_id, query_tokens, unit_ids)
        if feats is None:
            feats = self._compute(query_id, query_tokens, unit_ids)
            self._store_cached(query_id, query_tokens, feats)
        self._memo[query_id] = feats
        return feats

    def _compute(self, query_id, query_tokens, unit_ids) -> QueryFeatures:
        query_tokens = list(query_tokens)
        if not query_tokens:
            raise ValueError(f"query {query_id!r} has no tokens")
        qmat = self.embeddings.matrix(query_tokens)
        tensors = []
        for unit_id in unit_ids:
            tokens = list(self.tokens_of(unit_id))
            umat = self.embeddings.matrix(tokens)
            tensors.append(build_histograms(query_tokens, qmat, tokens, umat, self.cfg))
        histograms = (
            np.stack(tensors)
            if tensors
            else np.zeros((0, len(query_tokens), self.cfg.num_bins))
        )
        return QueryFeatures(query_id, unit_ids, histograms, self.gating_inputs(query_tokens))

    # Cache layout: meta (JSON string), units (unicode), histograms, gating.

    def _cache_path(self, query_id: str) -> str | None:
        if not self.cache_dir:
            return None
        safe = "".join(c if c.isalnum() or c in "._-" else f"_{ord(c):02x}" for c in query_id)
        return os.path.join(self.cache_dir, f"q{safe}.npz")

    def _meta(self, query_tokens) -> str:
        return json.dumps(
            {
                "num_bins": self.cfg.num_bins,
                "mode": self.cfg.mode,
                "gating": self.gating,
                "dim": self.gating_dim,
                "query_tokens": list(query_tokens),
            },
            sort_keys=True,
        )

    def _load_cached(self, query_id, query_tokens, unit_ids) -> QueryFeatures | None:
        path = self._cache_path(query_id)
        if path is None or not os.path.exists(path):
            return None
        try:
            with np.load(path, allow_pickle=False) as npz:
                if str(npz["meta"]) != self._meta(query_tokens):
                    return None
                cached_units = [str(u) for u in npz["units"]]
                if cached_units != unit_ids:
                    return None
                return QueryFeatures(
                    query_id, cached_units, npz["histograms"], npz["gating"]
                )
        except (OSError, ValueError, KeyError):
            return None

    def _store_cached(self, query_id, query_tokens, feats: QueryFeatures) -> None:
        path = self._cache_path(query_id)
        if path is None:
            return
        tmp = f"{path}.tmp.{os.getpid()}.npz"
        np.savez(
            tmp,
            meta=np.asarray(self._meta(query_tokens)),
            units=np.asarray(feats.unit_ids),
            histograms=feats.histograms,
            gating=feats.gating_inputs,
        )
        os.replace(tmp, path)


# -- scoring ------------------------------------------------------------------


def score_units(params: ModelParams, feats: QueryFeatures) -> np.ndarray:
    """Model scores for every unit of one query, shape (num_units,)."""
    num_units, m, num_bins = feats.histograms.shape
    if num_units == 0:
        return np.zeros(0)
    _, _, _, z = _mlp(params, feats.histograms.reshape(num_units * m, num_bins))
    g = gating_weights(params.w_g, feats.gating_inputs)
    return z.reshape(num_units, m) @ g


def rank_documents_maxp(params: ModelParams, feats: QueryFeatures) -> list[tuple[str, float]]:
    """Rank parent documents by their best unit score, ties by doc id."""
    best: dict[str, float] = {}
    for unit_id, s in zip(feats.unit_ids, score_units(params, feats)):
        doc = parent_doc_id(unit_id)
        score = float(s)
        if doc not in best or score > best[doc]:
            best[doc] = score
    return sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))


# -- training -----------------------------------------------------------------


@dataclass
class TrainingData:
    """Everything a fold needs, prebuilt so folds only select query ids.

    qrels holds the full judgments (used for validation AP); filtered_qrels
    holds only retrieved rows (used for pair sampling); retrieved maps each
    query to its scoreable unit ids in rank order.
    """

    qrels: dict[str, dict[str, int]]
    filtered_qrels: dict[str, dict[str, int]]
    retrieved: dict[str, list[str]]
    query_tokens: dict[str, list[str]]
    bank: FeatureBank

    @property
    def num_bins(self) -> int:
        return self.bank.cfg.num_bins

    @property
    def gating_dim(self) -> int:
        return self.bank.gating_dim

    def features(self, qid: str) -> QueryFeatures:
        return self.bank.features(qid, self.query_tokens[qid], self.retrieved[qid])


def prepare_training_data(
    query_tokens: dict[str, list[str]],
    retrieved: dict[str, list[str]],
    qrels: dict[str, dict[str, int]],
    bank: FeatureBank,
) -> TrainingData:
    """Drop unusable queries/units, filter qrels to the retrieved docs."""
    cleaned: dict[str, list[str]] = {}
    for qid in sorted(retrieved):
        if not query_tokens.get(qid):
            logger.warning("query %s has no tokens after preprocessing; dropped", qid)
            continue
        units = []
        for unit_id in retrieved[qid]:
            if len(bank.tokens_of(unit_id)) == 0:
                logger.warning("unit %s is empty; dropped from query %s", unit_id, qid)
                continue
            units.append(unit_id)
        if units:
            cleaned[qid] = units
    retrieved_docs = {
        qid: {parent_doc_id(u) for u in units} for qid, units in cleaned.items()
    }
    filtered = filter_qrels(qrels, retrieved_docs)
    return TrainingData(qrels, filtered, cleaned, dict(query_tokens), bank)


@dataclass
class FoldResult:
    params: ModelParams
    log: list[dict]
    best_epoch: int
    best_val_map: float
    skipped_queries: int


def _accumulate(total: ModelParams, delta: ModelParams) -> None:
    for name in PARAM_FIELDS:
        acc = getattr(total, name)
        acc += getattr(delta, name)


def _scale(grads: ModelParams, factor: float) -> None:
    for name in PARAM_FIELDS:
        arr = getattr(grads, name)
        arr *= factor


def mean_average_precision(
    params: ModelParams, data: TrainingData, qids: Iterable[str]
) -> float:
    """Macro MAP over queries with at least one relevant judged document."""
    aps = []
    for qid in sorted(qids):
        if qid not in data.retrieved:
            continue
        grades = data.qrels.get(qid, {})
        relevant = {doc for doc, grade in grades.items() if grade >= 1}
        if not relevant:
            continue
        ranking = [doc for doc, _ in rank_documents_maxp(params, data.features(qid))]
        aps.append(average_precision(ranking, relevant))
    return float(np.mean(aps)) if aps else 0.0


def train_fold(
    data: TrainingData,
    train_qids: Sequence[str],
    val_qids: Sequence[str],
    hp: Hyperparams,
    seed: int,
) -> FoldResult:
    """Mini-batch pairwise training with early stopping on validation MAP.

    Returns the parameter snapshot from the best validation epoch. Raises
    TrainingError when there are no pairs to learn from or the loss goes
    non-finite.
    """
    train_set = set(train_qids)
    retrieved_train = {q: u for q, u in data.retrieved.items() if q in train_set}
    pair_ids, skipped = sample_pair_ids(
        data.filtered_qrels, retrieved_train, seed, hp.n_neg
    )
    if not pair_ids:
        raise TrainingError("no training pairs after filtering and sampling")

    params = init_params(data.num_bins, data.gating_dim, seed)
    state = init_state(params, hp.rho, hp.epsilon)
    shuffle_rng = np.random.Generator(np.random.PCG64([seed, 1]))

    best_params = params.copy()
    best_map = -1.0
    best_epoch = -1
    log: list[dict] = []

    for epoch in range(hp.max_epochs):
        order = shuffle_rng.permutation(len(pair_ids))
        losses = np.empty(len(order))
        for start in range(0, len(order), hp.batch_size):
            batch = order[start : start + hp.batch_size]
            grads = zeros_like_params(params)
            for offset, k in enumerate(batch):
                qid, pos, neg = pair_ids[k]
                feats = data.features(qid)
                pair = TrainingPair(
                    qid,
                    pos,
                    neg,
                    feats.histogram_for(pos),
                    feats.histogram_for(neg),
                    feats.gating_inputs,
                )
                loss, delta = backward(params, pair)
                losses[start + offset] = loss
                _accumulate(grads, delta)
            _scale(grads, 1.0 / len(batch))
            params = adadelta_step(state, params, grads)

        mean_loss = float(losses.mean())
        if not np.isfinite(mean_loss) or not params.all_finite():
            raise TrainingError(f"training diverged at epoch {epoch}: loss {mean_loss}")
        val_map = mean_average_precision(params, data, val_qids)
        log.append({"epoch": epoch, "mean_loss": mean_loss, "val_map": val_map})
        if val_map > best_map:
            best_map = val_map
            best_epoch = epoch
            best_params = params.copy()
        elif epoch - best_epoch >= hp.patience:
            break

    return FoldResult(best_params, log, best_epoch, best_map, skipped)


@dataclass
class CrossValResult:
    folds: list[FoldResult]
    # test-fold rankings pooled across folds: query_id -> [(doc_id, score)]
    test_rankings: dict[str, list[tuple[str, float]]]


def check_folds(folds: Sequence[Sequence[str]]) -> None:
    seen: set[str] = set()
    for i, fold in enumerate(folds):
        if not fold:
            raise ValueError(f"fold {i} is empty")
        dup = seen.intersection(fold)
        if dup:
            raise ValueError(f"folds overlap on queries {sorted(dup)[:5]}")
        if len(set(fold)) != len(fold):
            raise ValueError(f"fold {i} repeats query ids")
        seen.update(fold)


def cross_validate(
    data: TrainingData, folds: Sequence[Sequence[str]], hp: Hyperparams
) -> CrossValResult:
    """Rotate test/validation/training folds; pool test-fold rankings.

    Fold f tests on folds[f], validates on folds[(f+1) % n], trains on the
    rest. Each query appears in exactly one test fold, so pooled rankings
    cover every foldable query once.
    """
    check_folds(folds)
    n = len(folds)
    if n < 3:
        raise ValueError("need at least 3 folds to split train/val/test")
    results = []
    pooled: dict[str, list[tuple[str, float]]] = {}
    for f in range(n):
        test_qids = list(folds[f])
        val_qids = list(folds[(f + 1) % n])
        train_qids = [q for i in range(n) if i not in (f, (f + 1) % n) for q in folds[i]]
        result = train_fold(data, train_qids, val_qids, hp, seed=hp.seed + f)
        results.append(result)
        for qid in sorted(test_qids):
            if qid in data.retrieved:
                pooled[qid] = rank_documents_maxp(result.params, data.features(qid))
    return CrossValResult(results, pooled)


def write_training_log(path: str, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
