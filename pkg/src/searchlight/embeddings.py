"""Word embedding store: text-format vector files plus deterministic OOV.

Vocabulary terms come from a whitespace-separated text file (one term and
its components per line, GloVe style). Terms missing from the file get a
vector drawn from a PRNG seeded with sha256 of "seed:term", so the same
term always maps to the same vector for a fixed seed, across processes and
platforms. OOV vectors are normalized to unit L2 norm.
"""

from __future__ import annotations

import hashlib
import logging

import numpy as np

log = logging.getLogger(__name__)


class EmbeddingStore:
    def __init__(self, dim: int, vectors: dict[str, np.ndarray], oov_seed: int = 42):
        self.dim = dim
        self._vectors = vectors
        self.oov_seed = oov_seed
        self._oov_cache: dict[str, np.ndarray] = {}

    @classmethod
    def load_text(
        cls, path: str, dim: int | None = None, oov_seed: int = 42
    ) -> "EmbeddingStore":
        """Parse `term c1 c2 ... cd` lines into a store.

        When `dim` is None the first well-formed line fixes it. Lines with
        the wrong field count (including word2vec-style count headers) are
        skipped with a warning; a file with zero usable lines is fatal.
        """
        vectors: dict[str, np.ndarray] = {}
        skipped = 0
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                parts = line.split()
                expected = None if dim is None else dim + 1
                if len(parts) < 2 or (expected is not None and len(parts) != expected):
                    skipped += 1
                    log.warning("%s:%d: expected %s fields, skipped", path, line_no, expected)
                    continue
                term = parts[0]
                try:
                    vec = np.asarray([float(x) for x in parts[1:]], dtype=np.float64)
                except ValueError:
                    skipped += 1
                    log.warning("%s:%d: non-numeric component, skipped", path, line_no)
                    continue
                if dim is None:
                    dim = vec.shape[0]
                vectors[term] = vec
        if not vectors:
            raise ValueError(f"{path}: no usable vectors found")
        if skipped:
            log.warning("%s: skipped %d malformed lines", path, skipped)
        return cls(dim, vectors, oov_seed)

    def __contains__(self, term: str) -> bool:
        return term in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def lookup(self, term: str) -> np.ndarray:
        vec = self._vectors.get(term)
        if vec is not None:
            return vec
        return self._oov_vector(term)

    def _oov_vector(self, term: str) -> np.ndarray:
        cached = self._oov_cache.get(term)
        if cached is not None:
            return cached
        digest = hashlib.sha256(f"{self.oov_seed}:{term}".encode("utf-8")).digest()
        rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], "big")))
        vec = rng.standard_normal(self.dim)
        vec /= np.linalg.norm(vec)
        self._oov_cache[term] = vec
        return vec

    def matrix(self, terms: list[str]) -> np.ndarray:
        """Stack vectors for `terms` into a (len(terms), dim) float64 array."""
        if not terms:
            return np.zeros((0, self.dim), dtype=np.float64)
        return np.stack([self.lookup(t) for t in terms])


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1].

    Rounding can push the ratio a hair outside the valid range; clamping
    keeps downstream binning honest. Zero-norm input yields 0.0.
    """
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(min(1.0, max(-1.0, np.dot(a, b) / (na * nb))))


def cosine_rows(query_vec: np.ndarray, doc_matrix: np.ndarray) -> np.ndarray:
    """Cosine between one query vector and every row of a document matrix.

    Zero-norm rows (and a zero-norm query) yield similarity 0 rather than
    NaN. This is the single kernel used for histogram construction so that
    batched and one-off paths produce bit-identical floats.
    """
    if doc_matrix.shape[0] == 0:
        return np.zeros(0, dtype=np.float64)
    qn = np.linalg.norm(query_vec)
    dn = np.linalg.norm(doc_matrix, axis=1)
    dots = doc_matrix @ query_vec
    denom = qn * dn
    out = np.zeros(doc_matrix.shape[0], dtype=np.float64)
    nonzero = denom > 0.0
    out[nonzero] = dots[nonzero] / denom[nonzero]
    np.clip(out, -1.0, 1.0, out=out)
    return out
