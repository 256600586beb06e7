"""Readers and writers for TREC-style file formats.

Covers SGML document collections (<DOC>...</DOC> records), topic files,
qrels and run files. Collection records are not XML, so tags are matched
with regular expressions rather than a strict parser.
"""

from __future__ import annotations

import logging
import os
import re
from typing import Iterator

from searchlight.corpus import RawDocument, Topic

log = logging.getLogger(__name__)

_DOC_RE = re.compile(r"<DOC>(.*?)</DOC>", re.DOTALL | re.IGNORECASE)
_DOCNO_RE = re.compile(r"<DOCNO>(.*?)</DOCNO>", re.DOTALL | re.IGNORECASE)
_TEXT_RE = re.compile(r"<TEXT>(.*?)</TEXT>", re.DOTALL | re.IGNORECASE)
_TAG_RE = re.compile(r"<[^>]+>")

# Title-like tags seen across TREC disks, tried in this order.
_TITLE_TAGS = ("HEADLINE", "TITLE", "HEAD", "HL", "TI")
_TITLE_RES = [
    re.compile(rf"<{tag}>(.*?)</{tag}>", re.DOTALL | re.IGNORECASE)
    for tag in _TITLE_TAGS
]


def _strip_tags(fragment: str) -> str:
    return _TAG_RE.sub(" ", fragment)


def _collapse_ws(text: str) -> str:
    return " ".join(text.split())


def parse_trec_collection(
    path: str, errors: list[str] | None = None
) -> Iterator[RawDocument]:
    """Yield one RawDocument per <DOC> record in a collection file.

    Records without a DOCNO are skipped; a message is appended to `errors`
    (when given) and logged, and parsing continues. An unreadable file
    raises OSError.
    """
    with open(path, encoding="utf-8", errors="replace") as fh:
        data = fh.read()

    for record_no, match in enumerate(_DOC_RE.finditer(data), start=1):
        record = match.group(1)
        docno = _DOCNO_RE.search(record)
        if docno is None:
            message = f"{path}: record {record_no} has no <DOCNO>, skipped"
            log.warning(message)
            if errors is not None:
                errors.append(message)
            continue
        doc_id = docno.group(1).strip()

        title = None
        title_span = None
        for title_re in _TITLE_RES:
            found = title_re.search(record)
            if found:
                title = _collapse_ws(_strip_tags(found.group(1)))
                title_span = found.span()
                break

        text_blocks = _TEXT_RE.findall(record)
        if text_blocks:
            body = "\n".join(_strip_tags(block).strip() for block in text_blocks)
        else:
            # No <TEXT> element: fall back to the whole record minus the
            # DOCNO and title elements, tags stripped.
            remainder = _DOCNO_RE.sub(" ", record)
            if title_span is not None:
                for title_re in _TITLE_RES:
                    remainder = title_re.sub(" ", remainder)
            body = _strip_tags(remainder).strip()

        yield RawDocument(doc_id=doc_id, title=title or None, body=body)


def iter_collection_files(path: str) -> list[str]:
    """Collection files under `path` in deterministic (sorted) order."""
    if os.path.isfile(path):
        return [path]
    files = []
    for root, _dirs, names in os.walk(path):
        for name in names:
            files.append(os.path.join(root, name))
    return sorted(files)


_NUM_RE = re.compile(r"<num>(?:\s*Number\s*:)?\s*([^<\s]+)", re.IGNORECASE)
_TITLE_FIELD_RE = re.compile(
    r"<title>(?:\s*Topic\s*:)?\s*(.*?)\s*(?=<|$)", re.IGNORECASE | re.DOTALL
)
_DESC_FIELD_RE = re.compile(
    r"<desc>(?:\s*Description\s*:)?\s*(.*?)\s*(?=<narr>|</top>|<top>|$)",
    re.IGNORECASE | re.DOTALL,
)


def parse_topics(path: str) -> list[Topic]:
    """Parse a TREC topics file into Topic records (query id, title, description)."""
    with open(path, encoding="utf-8", errors="replace") as fh:
        data = fh.read()

    topics = []
    chunks = re.split(r"<top>", data, flags=re.IGNORECASE)
    for chunk in chunks[1:]:
        num = _NUM_RE.search(chunk)
        title = _TITLE_FIELD_RE.search(chunk)
        if num is None or title is None:
            log.warning("%s: topic record without <num> or <title>, skipped", path)
            continue
        desc = _DESC_FIELD_RE.search(chunk)
        topics.append(
            Topic(
                query_id=num.group(1).strip(),
                title=_collapse_ws(title.group(1)),
                description=_collapse_ws(desc.group(1)) if desc else "",
            )
        )
    return topics


def read_qrels(path: str) -> dict[str, dict[str, int]]:
    """Read `qid 0 docid grade` lines into {qid: {docid: grade}}."""
    qrels: dict[str, dict[str, int]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise ValueError(f"{path}:{line_no}: expected 4 fields, got {len(parts)}")
            qid, _, doc_id, grade = parts
            by_query = qrels.setdefault(qid, {})
            if doc_id in by_query:
                raise ValueError(f"{path}:{line_no}: duplicate pair ({qid}, {doc_id})")
            by_query[doc_id] = int(grade)
    return qrels


def write_qrels(path: str, qrels: dict[str, dict[str, int]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for qid in sorted(qrels):
            for doc_id in sorted(qrels[qid]):
                fh.write(f"{qid} 0 {doc_id} {qrels[qid][doc_id]}\n")


def write_run(
    path: str, run: dict[str, list[tuple[str, float]]], tag: str = "searchlight"
) -> None:
    """Write a TREC run file: `qid Q0 docid rank score tag`, rank from 1.

    Scores are written with repr-level precision so a parsed run reproduces
    the in-memory floats exactly.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for qid in sorted(run):
            for rank, (doc_id, score) in enumerate(run[qid], start=1):
                fh.write(f"{qid} Q0 {doc_id} {rank} {score!r} {tag}\n")


def read_run(path: str) -> dict[str, list[tuple[str, float]]]:
    """Read a run file back into {qid: [(docid, score), ...]} ordered by rank."""
    rows: dict[str, list[tuple[int, str, float]]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise ValueError(f"{path}:{line_no}: expected 6 fields, got {len(parts)}")
            qid, _q0, doc_id, rank, score, _tag = parts
            rows.setdefault(qid, []).append((int(rank), doc_id, float(score)))
    run: dict[str, list[tuple[str, float]]] = {}
    for qid, entries in rows.items():
        entries.sort(key=lambda row: row[0])
        run[qid] = [(doc_id, score) for _rank, doc_id, score in entries]
    return run
