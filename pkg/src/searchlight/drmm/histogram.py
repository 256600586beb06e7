"""Matching histograms: binned interaction vectors per (query term, text unit).

For one query term against a unit (document or passage), every unit term
contributes one count. Pairs whose token strings are identical go to the
dedicated last bin; all other pairs are binned by the cosine similarity of
their embeddings. With num_bins = B that means B - 1 equal-width similarity
bins over [-1, 1) plus the exact-match bin, so the default of 30 keeps the
conventional total while still separating exact matches.

Exact match is decided by token identity after preprocessing, never by
cosine == 1, so OOV vectors and float noise cannot leak real matches into
the similarity bins. Cosines are clamped to [-1, 1): a non-identical pair
with cosine 1 lands in the highest similarity bin.

Three count transforms are supported: logcount ln(1 + c) (the supported
path), raw count, and count normalized by unit length. A histogram is a
plain float64 vector of length num_bins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..embeddings import cosine_rows

MODE_LOGCOUNT = "logcount"
MODE_COUNT = "count"
MODE_NORMALIZED = "normalized"
MODES = (MODE_LOGCOUNT, MODE_COUNT, MODE_NORMALIZED)


@dataclass(frozen=True)
class HistogramConfig:
    num_bins: int = 30
    mode: str = MODE_LOGCOUNT

    def __post_init__(self):
        if self.num_bins < 2:
            raise ValueError("num_bins must be >= 2: similarity bins plus the exact-match bin")
        if self.mode not in MODES:
            raise ValueError(f"unknown histogram mode {self.mode!r}; expected one of {MODES}")


def bin_index(cosine: float, num_bins: int) -> int:
    """Similarity bin for one cosine value (exact-match pairs never get here).

    floor((c + 1) / width) with width = 2 / (num_bins - 1), input clamped to
    [-1, 1]; c == 1 is folded into the top similarity bin num_bins - 2.
    """
    width = 2.0 / (num_bins - 1)
    c = min(max(float(cosine), -1.0), 1.0)
    return min(int((c + 1.0) / width), num_bins - 2)


def build_histograms(
    query_tokens: Sequence[str],
    query_matrix: np.ndarray,
    unit_tokens: Sequence[str],
    unit_matrix: np.ndarray,
    cfg: HistogramConfig,
) -> np.ndarray:
    """Histograms for every query term against one unit, shape (M, num_bins).

    This is the only binning kernel; the single-term entry point delegates
    here so one-off and batched calls produce identical floats.
    """
    if len(unit_tokens) == 0:
        raise ValueError("unit has no terms; callers must skip empty units")
    if len(query_tokens) != query_matrix.shape[0]:
        raise ValueError("query token/vector count mismatch")
    if len(unit_tokens) != unit_matrix.shape[0]:
        raise ValueError("unit token/vector count mismatch")

    width = 2.0 / (cfg.num_bins - 1)
    token_arr = np.asarray(unit_tokens)
    out = np.empty((len(query_tokens), cfg.num_bins), dtype=np.float64)
    for i, qtoken in enumerate(query_tokens):
        exact = token_arr == qtoken
        sims = cosine_rows(query_matrix[i], unit_matrix)
        np.clip(sims, -1.0, 1.0, out=sims)
        idx = ((sims + 1.0) / width).astype(np.int64)
        np.minimum(idx, cfg.num_bins - 2, out=idx)
        counts = np.bincount(idx[~exact], minlength=cfg.num_bins).astype(np.float64)
        counts[-1] += float(exact.sum())
        out[i] = _transform(counts, cfg.mode, len(unit_tokens))
    return out


def build_histogram(
    query_term: tuple[str, np.ndarray],
    unit_terms: Sequence[tuple[str, np.ndarray]],
    cfg: HistogramConfig,
) -> np.ndarray:
    """Histogram for a single (token, vector) query term against unit terms."""
    if len(unit_terms) == 0:
        raise ValueError("unit has no terms; callers must skip empty units")
    token, vec = query_term
    unit_tokens = [t for t, _ in unit_terms]
    unit_matrix = np.stack([np.asarray(v, dtype=np.float64) for _, v in unit_terms])
    qmat = np.asarray(vec, dtype=np.float64)[None, :]
    return build_histograms([token], qmat, unit_tokens, unit_matrix, cfg)[0]


def _transform(counts: np.ndarray, mode: str, num_unit_terms: int) -> np.ndarray:
    if mode == MODE_COUNT:
        return counts
    if mode == MODE_LOGCOUNT:
        return np.log1p(counts)
    return counts / float(num_unit_terms)
