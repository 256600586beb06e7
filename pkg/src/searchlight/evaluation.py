"""Ranking metrics (AP, P@k, nDCG@k), fold assignment, and run evaluation.

Binary metrics treat grade >= 1 as relevant; nDCG uses the raw grades as
gains. AP is uncapped: the denominator is the total number of relevant
documents for the query, not the number retrieved, matching standard trec
evaluation so reported MAP is comparable to published numbers.

Fold assignment is round-robin over lexicographically sorted query ids.
This is a deterministic substitute for published fold memberships that are
not available; any two runs over the same query set agree exactly.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

log = logging.getLogger(__name__)

DEFAULT_K = 20
NUM_FOLDS = 5


def average_precision(ranking: Sequence[str], relevant: set[str]) -> float:
    """Mean precision at each relevant rank, divided by |relevant|."""
    if not relevant:
        raise ValueError("average_precision needs a non-empty relevant set")
    hits = 0
    total = 0.0
    for rank, doc_id in enumerate(ranking, start=1):
        if doc_id in relevant:
            hits += 1
            total += hits / rank
    return total / len(relevant)


def precision_at_k(ranking: Sequence[str], relevant: set[str], k: int = DEFAULT_K) -> float:
    """|relevant in top k| / k; the denominator stays k even for short rankings."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(1 for doc_id in ranking[:k] if doc_id in relevant)
    return hits / k


def ndcg_at_k(
    ranking: Sequence[str], grades: Mapping[str, int], k: int = DEFAULT_K
) -> float:
    """DCG with gain = grade and discount 1/log2(rank + 1), over ideal DCG.

    Returns 0.0 when the query has no positive grade at all (ideal DCG 0).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    dcg = 0.0
    for rank, doc_id in enumerate(ranking[:k], start=1):
        grade = grades.get(doc_id, 0)
        if grade > 0:
            dcg += grade / math.log2(rank + 1)
    ideal = sorted((g for g in grades.values() if g > 0), reverse=True)
    idcg = 0.0
    for rank, grade in enumerate(ideal[:k], start=1):
        idcg += grade / math.log2(rank + 1)
    if idcg == 0.0:
        return 0.0
    return dcg / idcg


def make_folds(query_ids: Iterable[str], num_folds: int = NUM_FOLDS) -> list[list[str]]:
    """Assign sorted query ids round-robin to num_folds folds."""
    ids = sorted(query_ids)
    if len(ids) < num_folds:
        raise ValueError(f"need at least {num_folds} queries, got {len(ids)}")
    if len(set(ids)) != len(ids):
        raise ValueError("query ids repeat")
    folds: list[list[str]] = [[] for _ in range(num_folds)]
    for i, qid in enumerate(ids):
        folds[i % num_folds].append(qid)
    return folds


@dataclass
class EvalReport:
    """Per-query metrics plus macro means over the evaluated queries."""

    k: int
    per_query: dict[str, dict[str, float]] = field(default_factory=dict)
    excluded: list[str] = field(default_factory=list)

    @property
    def query_count(self) -> int:
        return len(self.per_query)

    @property
    def means_defined(self) -> bool:
        return self.query_count > 0

    def _mean(self, metric: str) -> float:
        if not self.per_query:
            return 0.0
        return sum(row[metric] for row in self.per_query.values()) / len(self.per_query)

    @property
    def map(self) -> float:
        return self._mean("ap")

    @property
    def mean_precision(self) -> float:
        return self._mean("p_at_k")

    @property
    def mean_ndcg(self) -> float:
        return self._mean("ndcg_at_k")

    def as_table(self) -> str:
        lines = [f"{'query':<12} {'AP':>8} {'P@' + str(self.k):>8} {'nDCG@' + str(self.k):>8}"]
        for qid in sorted(self.per_query):
            row = self.per_query[qid]
            lines.append(
                f"{qid:<12} {row['ap']:>8.4f} {row['p_at_k']:>8.4f} {row['ndcg_at_k']:>8.4f}"
            )
        lines.append(
            f"{'all (' + str(self.query_count) + ')':<12} "
            f"{self.map:>8.4f} {self.mean_precision:>8.4f} {self.mean_ndcg:>8.4f}"
        )
        if not self.means_defined:
            lines.append("no evaluable queries; means reported as 0")
        return "\n".join(lines)

    def as_jsonl(self) -> str:
        lines = []
        for qid in sorted(self.per_query):
            record = {"query_id": qid}
            record.update(self.per_query[qid])
            lines.append(json.dumps(record, sort_keys=True))
        lines.append(
            json.dumps(
                {
                    "query_id": "all",
                    "map": self.map,
                    "mean_p_at_k": self.mean_precision,
                    "mean_ndcg_at_k": self.mean_ndcg,
                    "query_count": self.query_count,
                    "means_defined": self.means_defined,
                },
                sort_keys=True,
            )
        )
        return "\n".join(lines) + "\n"


def evaluate_run(
    run: Mapping[str, Sequence[tuple[str, float]]],
    qrels: Mapping[str, Mapping[str, int]],
    k: int = DEFAULT_K,
) -> EvalReport:
    """Score a run against qrels.

    Queries missing from the qrels, or with no relevant document, are
    excluded from the means and listed in the report. Ranked lists are
    assumed rank-ordered, as produced by the run reader.
    """
    report = EvalReport(k=k)
    for qid in sorted(run):
        grades = qrels.get(qid)
        if grades is None:
            log.warning("run query %s has no judgments; excluded", qid)
            report.excluded.append(qid)
            continue
        relevant = {doc_id for doc_id, grade in grades.items() if grade >= 1}
        if not relevant:
            report.excluded.append(qid)
            continue
        ranking = [doc_id for doc_id, _score in run[qid]]
        report.per_query[qid] = {
            "ap": average_precision(ranking, relevant),
            "p_at_k": precision_at_k(ranking, relevant, k),
            "ndcg_at_k": ndcg_at_k(ranking, grades, k),
        }
    return report
