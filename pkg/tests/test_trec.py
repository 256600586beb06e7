"""Parsers and writers for the line-oriented evaluation data formats."""

import pytest

from searchlight.trec import (
    iter_collection_files,
    parse_topics,
    parse_trec_collection,
    read_qrels,
    read_run,
    write_qrels,
    write_run,
)

SGML_DOC = """
<DOC>
<DOCNO> LA010189-0001 </DOCNO>
<HEADLINE>
<P>
Storm Hits Coast
</P>
</HEADLINE>
<TEXT>
<P>
Heavy rain fell overnight.
</P>
<P>
Rivers rose quickly.
</P>
</TEXT>
</DOC>
<DOC>
<DOCNO>LA010189-0002</DOCNO>
<TEXT>
No headline here.
</TEXT>
</DOC>
"""


def test_parse_collection_two_docs(tmp_path):
    path = tmp_path / "coll.sgml"
    path.write_text(SGML_DOC)
    errors = []
    docs = list(parse_trec_collection(str(path), errors))
    assert errors == []
    assert [d.doc_id for d in docs] == ["LA010189-0001", "LA010189-0002"]
    assert docs[0].title == "Storm Hits Coast"
    assert "Heavy rain fell overnight." in docs[0].body
    assert "Rivers rose quickly." in docs[0].body
    assert docs[1].title is None
    assert "No headline here." in docs[1].body


def test_parse_collection_skips_docs_without_docno(tmp_path):
    path = tmp_path / "bad.sgml"
    path.write_text("<DOC>\n<TEXT>orphan</TEXT>\n</DOC>\n" + SGML_DOC)
    errors = []
    docs = list(parse_trec_collection(str(path), errors))
    assert len(errors) == 1
    assert "no <DOCNO>" in errors[0]
    assert len(docs) == 2


def test_parse_collection_without_text_element(tmp_path):
    path = tmp_path / "plain.sgml"
    path.write_text("<DOC>\n<DOCNO>X1</DOCNO>\nBare words outside tags.\n</DOC>\n")
    docs = list(parse_trec_collection(str(path)))
    assert docs[0].doc_id == "X1"
    assert "Bare words outside tags." in docs[0].body


def test_iter_collection_files_sorted(tmp_path):
    (tmp_path / "b").mkdir()
    (tmp_path / "a").mkdir()
    f1 = tmp_path / "b" / "two.sgml"
    f2 = tmp_path / "a" / "one.sgml"
    f1.write_text("x")
    f2.write_text("y")
    files = iter_collection_files(str(tmp_path))
    assert files == sorted([str(f2), str(f1)])
    assert iter_collection_files(str(f1)) == [str(f1)]


def test_parse_topics(tmp_path):
    path = tmp_path / "topics.txt"
    path.write_text(
        "<top>\n"
        "<num> Number: 301 \n"
        "<title> International Organized Crime \n"
        "<desc> Description: \n"
        "Identify organizations that participate in international criminal\n"
        "activity.\n"
        "<narr> Narrative: \n"
        "Ignore this part.\n"
        "</top>\n"
        "<top>\n"
        "<num> Number: 302\n"
        "<title>\n"
        "Poliomyelitis and Post-Polio\n"
        "<desc> Description:\n"
        "Is the disease of Poliomyelitis under control?\n"
        "</top>\n"
    )
    topics = parse_topics(str(path))
    assert [t.query_id for t in topics] == ["301", "302"]
    assert topics[0].title == "International Organized Crime"
    assert topics[0].description.startswith("Identify organizations")
    assert "Ignore" not in topics[0].description
    assert topics[1].title == "Poliomyelitis and Post-Polio"
    assert topics[1].description == "Is the disease of Poliomyelitis under control?"


def test_qrels_round_trip(tmp_path):
    path = tmp_path / "qrels.txt"
    path.write_text("301 0 LA010189-0001 1\n301 0 LA010189-0002 0\n302 0 LA010189-0001 2\n")
    qrels = read_qrels(str(path))
    assert qrels == {
        "301": {"LA010189-0001": 1, "LA010189-0002": 0},
        "302": {"LA010189-0001": 2},
    }
    out = tmp_path / "rt.txt"
    write_qrels(str(out), qrels)
    assert read_qrels(str(out)) == qrels


def test_read_qrels_rejects_malformed_line(tmp_path):
    path = tmp_path / "qrels.txt"
    path.write_text("301 0 LA010189-0001\n")
    with pytest.raises(ValueError):
        read_qrels(str(path))


def test_read_qrels_rejects_duplicate_pair(tmp_path):
    path = tmp_path / "qrels.txt"
    path.write_text("301 0 D1 1\n301 0 D1 0\n")
    with pytest.raises(ValueError):
        read_qrels(str(path))


def test_run_round_trip(tmp_path):
    run = {
        "301": [("DOC-B", 2.5), ("DOC-A", 1.25)],
        "302": [("DOC-C", 0.5)],
    }
    path = tmp_path / "run.txt"
    write_run(str(path), run, tag="testtag")
    lines = path.read_text().strip().split("\n")
    assert lines[0].split() == ["301", "Q0", "DOC-B", "1", "2.5", "testtag"]
    assert lines[1].split() == ["301", "Q0", "DOC-A", "2", "1.25", "testtag"]
    assert read_run(str(path)) == run


def test_run_scores_survive_round_trip_exactly(tmp_path):
    # repr-level precision: a third of unity must come back bit-identical
    run = {"1": [("D1", 1.0 / 3.0), ("D2", 0.1 + 0.2)]}
    path = tmp_path / "run.txt"
    write_run(str(path), run)
    parsed = read_run(str(path))
    assert parsed["1"][0][1] == 1.0 / 3.0
    assert parsed["1"][1][1] == 0.1 + 0.2


def test_read_run_orders_by_rank_column(tmp_path):
    path = tmp_path / "run.txt"
    path.write_text(
        "301 Q0 DOC-A 2 1.0 t\n"
        "301 Q0 DOC-B 1 2.0 t\n"
    )
    parsed = read_run(str(path))
    assert [d for d, _ in parsed["301"]] == ["DOC-B", "DOC-A"]
