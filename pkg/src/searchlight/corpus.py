"""Document, topic and passage types plus the on-disk document store.

Documents are indexed over title tokens followed by body tokens (the title
is what the result page shows, so it should also count for matching), while
passages cover body tokens only: their character spans must point into the
raw body for snippets and thumbnail geometry.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from searchlight.tokenizer import Tokenizer, TokenizedText

log = logging.getLogger(__name__)

DEFAULT_PASSAGE_LEN = 100


@dataclass(frozen=True)
class RawDocument:
    doc_id: str
    body: str
    title: str | None = None

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")


@dataclass(frozen=True)
class Topic:
    query_id: str
    title: str
    description: str = ""


@dataclass(frozen=True)
class Passage:
    """A contiguous run of body tokens; char_span slices the raw body."""

    doc_id: str
    passage_index: int
    tokens: tuple[str, ...]
    char_span: tuple[int, int]


def split_passages(
    doc: RawDocument,
    tokenizer: Tokenizer,
    passage_len: int = DEFAULT_PASSAGE_LEN,
    tokenized: TokenizedText | None = None,
) -> list[Passage]:
    """Chunk body tokens into non-overlapping passages of `passage_len`.

    The final remainder is kept as a short passage. A document whose body
    tokenizes to nothing yields an empty list. Pass `tokenized` to reuse an
    existing tokenization of the body.
    """
    if passage_len < 1:
        raise ValueError("passage_len must be >= 1")
    if tokenized is None:
        tokenized = tokenizer.tokenize(doc.body)
    passages = []
    for start in range(0, len(tokenized.tokens), passage_len):
        chunk_tokens = tokenized.tokens[start : start + passage_len]
        chunk_offsets = tokenized.offsets[start : start + passage_len]
        passages.append(
            Passage(
                doc_id=doc.doc_id,
                passage_index=len(passages),
                tokens=chunk_tokens,
                char_span=(chunk_offsets[0][0], chunk_offsets[-1][1]),
            )
        )
    return passages


def passage_unit_id(doc_id: str, passage_index: int) -> str:
    return f"{doc_id}#p{passage_index:05d}"


def split_passage_unit_id(unit_id: str) -> tuple[str, int]:
    doc_id, _, suffix = unit_id.rpartition("#p")
    return doc_id, int(suffix)


def parent_doc_id(unit_id: str) -> str:
    """Document behind a unit id: strips the passage suffix, if any."""
    doc_id, sep, suffix = unit_id.rpartition("#p")
    if sep and suffix.isdigit():
        return doc_id
    return unit_id


_STORE_MAGIC = "searchlight-docs"
_STORE_VERSION = 1


class DocumentStore:
    """Raw documents by id, persisted as versioned JSONL.

    The store keeps raw titles and bodies: snippets and thumbnails are
    sliced out of the original text at serving time, and token streams are
    recomputed on demand (tokenization is deterministic, so nothing else
    needs to be persisted).
    """

    def __init__(self, documents: dict[str, RawDocument] | None = None):
        self._docs: dict[str, RawDocument] = dict(documents or {})

    def __len__(self) -> int:
        return len(self._docs)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def add(self, doc: RawDocument) -> None:
        if doc.doc_id in self._docs:
            raise ValueError(f"duplicate doc_id {doc.doc_id!r}")
        self._docs[doc.doc_id] = doc

    def get(self, doc_id: str) -> RawDocument:
        return self._docs[doc_id]

    def doc_ids(self) -> list[str]:
        return sorted(self._docs)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            header = {"format": _STORE_MAGIC, "version": _STORE_VERSION, "count": len(self._docs)}
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for doc_id in sorted(self._docs):
                doc = self._docs[doc_id]
                row = {"doc_id": doc.doc_id, "title": doc.title, "body": doc.body}
                fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path: str) -> "DocumentStore":
        store = cls()
        with open(path, encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            if header.get("format") != _STORE_MAGIC:
                raise ValueError(f"{path}: not a document store file")
            if header.get("version") != _STORE_VERSION:
                raise ValueError(f"{path}: unsupported store version {header.get('version')}")
            for line in fh:
                row = json.loads(line)
                store.add(RawDocument(doc_id=row["doc_id"], title=row["title"], body=row["body"]))
        return store


@dataclass
class TokenizedDocument:
    """Cached token views of one document."""

    doc: RawDocument
    body: TokenizedText
    title: TokenizedText
    passages: list[Passage] = field(default_factory=list)

    @property
    def matching_tokens(self) -> tuple[str, ...]:
        """Token sequence used for indexing and whole-document matching."""
        return self.title.tokens + self.body.tokens


class TokenView:
    """Tokenizes store documents lazily and memoizes the results."""

    def __init__(
        self,
        store: DocumentStore,
        tokenizer: Tokenizer,
        passage_len: int = DEFAULT_PASSAGE_LEN,
    ):
        self.store = store
        self.tokenizer = tokenizer
        self.passage_len = passage_len
        self._cache: dict[str, TokenizedDocument] = {}

    def get(self, doc_id: str) -> TokenizedDocument:
        cached = self._cache.get(doc_id)
        if cached is None:
            doc = self.store.get(doc_id)
            body = self.tokenizer.tokenize(doc.body)
            cached = TokenizedDocument(
                doc=doc,
                body=body,
                title=self.tokenizer.tokenize(doc.title or ""),
            )
            cached.passages = split_passages(
                doc, self.tokenizer, self.passage_len, tokenized=body
            )
            self._cache[doc_id] = cached
        return cached
