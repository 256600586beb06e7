"""Text normalization shared by indexing, training and query processing.

One tokenizer instance is the single source of truth for a deployment: the
index, the ranking model and the query side must all see identical token
streams, so every entry point (CLI, trainer, HTTP service) builds its
tokenizer from the same config. Tokens carry character offsets into the raw
input so the result page can highlight surface forms the user actually typed
or read, not stemmed variants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from searchlight import porter

_WORD_RE = re.compile(r"[A-Za-z0-9]+")


@dataclass(frozen=True)
class TokenizedText:
    """Normalized tokens plus per-token (char_start, char_end) spans.

    Offsets point into the original, pre-normalization string; slicing the
    raw text with them recovers the surface form of each token.
    """

    tokens: tuple[str, ...] = ()
    offsets: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if len(self.tokens) != len(self.offsets):
            raise ValueError("tokens and offsets must have equal length")

    def __len__(self) -> int:
        return len(self.tokens)

    def surface_forms(self, raw: str) -> list[str]:
        return [raw[s:e] for s, e in self.offsets]


def load_stopwords(path: str | None = None) -> frozenset[str]:
    """Read one stopword per line; blank lines and '#' comments are skipped.

    With no path, the frozen list bundled with the package is used.
    """
    if path is None:
        text = (
            resources.files("searchlight")
            .joinpath("data/stopwords.txt")
            .read_text(encoding="utf-8")
        )
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


@dataclass(frozen=True)
class Tokenizer:
    """Lowercase, split on non-alphanumerics, drop stopwords, stem.

    Deterministic by construction: no locale, no external state. Stopword
    removal happens before stemming, on the lowercased surface form.
    """

    stopwords: frozenset[str] = field(default_factory=load_stopwords)
    stemming: bool = True

    def tokenize(self, text: str) -> TokenizedText:
        tokens: list[str] = []
        offsets: list[tuple[int, int]] = []
        for match in _WORD_RE.finditer(text):
            term = match.group().lower()
            if term in self.stopwords:
                continue
            if self.stemming:
                term = porter.stem(term)
            tokens.append(term)
            offsets.append((match.start(), match.end()))
        return TokenizedText(tuple(tokens), tuple(offsets))

    def normalize_term(self, word: str) -> str:
        """Normalization applied to a single already-split word."""
        term = word.lower()
        return porter.stem(term) if self.stemming else term
