"""Immutable inverted index with BM25 scoring and top-K retrieval.

Two IDF formulas live here on purpose and must not be conflated:

* BM25 uses ln((N - df + 0.5) / (df + 0.5) + 1), which is non-negative for
  every df, so partial matches never subtract from a score.
* The term-gating side of the ranking model uses ln((N + 1) / (df + 1)) + 1,
  a strictly positive weight that still grows for rare terms and is exposed
  as `Index.idf`.

Persisted index files are line-based text with a version header; the layout
is documented on `Index.save`.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, Sequence

FORMAT_MAGIC = "searchlight-index"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class RetrievalConfig:
    k1: float = 0.9
    b: float = 0.4
    k: int = 1000

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError("k1 must be >= 0")
        if not 0 <= self.b <= 1:
            raise ValueError("b must be in [0, 1]")
        if self.k < 1:
            raise ValueError("K must be >= 1")


class Index:
    """Inverted index over (unit_id, tokens) pairs, immutable after build.

    Units are documents or passages; internal unit indices follow the
    lexicographic order of unit ids, so postings sorted by index are also
    sorted by unit id.
    """

    def __init__(
        self,
        unit_ids: list[str],
        lengths: list[int],
        postings: dict[str, list[tuple[int, int]]],
        unit_kind: str,
    ):
        self.unit_ids = unit_ids
        self.lengths = lengths
        self.postings = postings
        self.unit_kind = unit_kind
        self.num_units = len(unit_ids)
        self.avg_length = (sum(lengths) / len(lengths)) if lengths else 0.0
        self._id_to_idx = {unit_id: i for i, unit_id in enumerate(unit_ids)}

    @classmethod
    def build(
        cls,
        units: Iterable[tuple[str, Sequence[str]]],
        unit_kind: str = "document",
    ) -> "Index":
        """Build from (unit_id, tokens) pairs; duplicate ids are a fatal error.

        Zero units produce a valid empty index (searches return nothing).
        """
        if unit_kind not in ("document", "passage"):
            raise ValueError(f"unknown unit kind {unit_kind!r}")
        collected: dict[str, Sequence[str]] = {}
        for unit_id, tokens in units:
            if unit_id in collected:
                raise ValueError(f"duplicate unit_id {unit_id!r}")
            collected[unit_id] = tokens

        unit_ids = sorted(collected)
        lengths = []
        postings: dict[str, list[tuple[int, int]]] = {}
        for idx, unit_id in enumerate(unit_ids):
            tokens = collected[unit_id]
            lengths.append(len(tokens))
            counts: dict[str, int] = {}
            for token in tokens:
                counts[token] = counts.get(token, 0) + 1
            for term, tf in counts.items():
                postings.setdefault(term, []).append((idx, tf))
        return cls(unit_ids, lengths, postings, unit_kind)

    # -- statistics ---------------------------------------------------------

    def doc_length(self, unit_id: str) -> int:
        return self.lengths[self._id_to_idx[unit_id]]

    def document_frequency(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def term_frequency(self, term: str, unit_id: str) -> int:
        plist = self.postings.get(term)
        if not plist:
            return 0
        idx = self._id_to_idx[unit_id]
        pos = bisect_left(plist, (idx,))
        if pos < len(plist) and plist[pos][0] == idx:
            return plist[pos][1]
        return 0

    def bm25_idf(self, term: str) -> float:
        df = self.document_frequency(term)
        return math.log((self.num_units - df + 0.5) / (df + 0.5) + 1.0)

    def idf(self, term: str) -> float:
        """Gating IDF: ln((N + 1) / (df + 1)) + 1; max for unseen terms."""
        df = self.document_frequency(term)
        return math.log((self.num_units + 1) / (df + 1)) + 1.0

    # -- scoring ------------------------------------------------------------

    def bm25_score(
        self, cfg: RetrievalConfig, query_terms: Sequence[str], unit_id: str
    ) -> float:
        """BM25 over query term occurrences; absent terms contribute 0."""
        if unit_id not in self._id_to_idx:
            raise KeyError(f"unit {unit_id!r} not indexed")
        length = self.doc_length(unit_id)
        score = 0.0
        for term in query_terms:
            tf = self.term_frequency(term, unit_id)
            if tf == 0:
                continue
            score += self._bm25_term(cfg, term, tf, length)
        return score

    def _bm25_term(self, cfg: RetrievalConfig, term: str, tf: int, length: int) -> float:
        norm = cfg.k1 * (1.0 - cfg.b + cfg.b * length / self.avg_length)
        return self.bm25_idf(term) * tf * (cfg.k1 + 1.0) / (tf + norm)

    def retrieve_topk(
        self, cfg: RetrievalConfig, query_terms: Sequence[str]
    ) -> list[tuple[str, float]]:
        """Top-K units by BM25, score descending, unit_id ascending on ties.

        Only units with score > 0 appear, so the result can be shorter
        than K; an empty query returns an empty list.
        """
        scores: dict[int, float] = {}
        for term in query_terms:
            plist = self.postings.get(term)
            if not plist:
                continue
            idf = self.bm25_idf(term)
            for idx, tf in plist:
                norm = cfg.k1 * (
                    1.0 - cfg.b + cfg.b * self.lengths[idx] / self.avg_length
                )
                scores[idx] = scores.get(idx, 0.0) + idf * tf * (cfg.k1 + 1.0) / (tf + norm)
        ranked = [
            (self.unit_ids[idx], score) for idx, score in scores.items() if score > 0.0
        ]
        ranked.sort(key=lambda pair: (-pair[1], pair[0]))
        return ranked[: cfg.k]

    # -- persistence --------------------------------------------------------

    def save(self, path: str) -> None:
        """Write the index as versioned text.

        Layout: a `magic<TAB>version` line, a JSON meta line, one
        `U<TAB>unit_id<TAB>length` line per unit in index order, then one
        `P<TAB>term<TAB>idx:tf idx:tf ...` line per term, terms sorted.
        """
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{FORMAT_MAGIC}\t{FORMAT_VERSION}\n")
            meta = {
                "unit_kind": self.unit_kind,
                "num_units": self.num_units,
                "avg_length": self.avg_length,
            }
            fh.write(json.dumps(meta, sort_keys=True) + "\n")
            for unit_id, length in zip(self.unit_ids, self.lengths):
                fh.write(f"U\t{unit_id}\t{length}\n")
            for term in sorted(self.postings):
                cells = " ".join(f"{idx}:{tf}" for idx, tf in self.postings[term])
                fh.write(f"P\t{term}\t{cells}\n")

    @classmethod
    def load(cls, path: str) -> "Index":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if len(header) != 2 or header[0] != FORMAT_MAGIC:
                raise ValueError(f"{path}: not a {FORMAT_MAGIC} file")
            if int(header[1]) != FORMAT_VERSION:
                raise ValueError(f"{path}: unsupported index version {header[1]}")
            meta = json.loads(fh.readline())
            unit_ids: list[str] = []
            lengths: list[int] = []
            postings: dict[str, list[tuple[int, int]]] = {}
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                kind, _, rest = line.partition("\t")
                if kind == "U":
                    unit_id, _, length = rest.rpartition("\t")
                    unit_ids.append(unit_id)
                    lengths.append(int(length))
                elif kind == "P":
                    term, _, cells = rest.partition("\t")
                    plist = []
                    for cell in cells.split():
                        idx, _, tf = cell.partition(":")
                        plist.append((int(idx), int(tf)))
                    postings[term] = plist
                else:
                    raise ValueError(f"{path}: unknown record kind {kind!r}")
        index = cls(unit_ids, lengths, postings, meta["unit_kind"])
        if index.num_units != meta["num_units"]:
            raise ValueError(f"{path}: unit count mismatch")
        return index
