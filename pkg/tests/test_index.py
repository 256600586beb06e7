"""Inverted index statistics, BM25 scoring, and the on-disk format."""

import math

import numpy as np
import pytest

from searchlight.index import Index, RetrievalConfig

CFG = RetrievalConfig()


@pytest.fixture()
def tiny_index():
    units = [
        ("D3", ["flood", "recovery", "flood"]),
        ("D1", ["storm", "coast", "storm", "rain"]),
        ("D2", ["drought", "heat"]),
        ("D4", ["storm", "flood"]),
    ]
    return Index.build(units, unit_kind="document")


def test_unit_ids_sorted(tiny_index):
    assert tiny_index.unit_ids == ["D1", "D2", "D3", "D4"]
    assert tiny_index.num_units == 4
    assert tiny_index.avg_length == (4 + 2 + 3 + 2) / 4


def test_statistics(tiny_index):
    assert tiny_index.doc_length("D1") == 4
    assert tiny_index.document_frequency("storm") == 2
    assert tiny_index.document_frequency("absent") == 0
    assert tiny_index.term_frequency("storm", "D1") == 2
    assert tiny_index.term_frequency("storm", "D2") == 0
    assert tiny_index.term_frequency("absent", "D1") == 0


def test_bm25_idf_formula(tiny_index):
    # df=2, N=4: ln((4 - 2 + 0.5) / (2 + 0.5) + 1) = ln(2)
    assert tiny_index.bm25_idf("storm") == pytest.approx(math.log(2.0), rel=1e-12)
    # unseen term: ln((4 + 0.5) / 0.5 + 1) = ln(10)
    assert tiny_index.bm25_idf("absent") == pytest.approx(math.log(10.0), rel=1e-12)


def test_bm25_idf_worked_example():
    # one matching doc out of three: ln((3 - 1 + 0.5)/(1 + 0.5) + 1) = ln(8/3)
    idx = Index.build([("A", ["x"]), ("B", ["y"]), ("C", ["z"])])
    assert idx.bm25_idf("x") == pytest.approx(math.log(8.0 / 3.0), rel=1e-12)


def test_gating_idf_formula(tiny_index):
    # df=2, N=4: ln(5/3) + 1
    assert tiny_index.idf("storm") == pytest.approx(math.log(5.0 / 3.0) + 1.0, rel=1e-12)
    # unseen: ln(N + 1) + 1 is the maximum
    assert tiny_index.idf("absent") == pytest.approx(math.log(5.0) + 1.0, rel=1e-12)
    assert tiny_index.idf("absent") >= tiny_index.idf("storm")


def test_bm25_score_manual(tiny_index):
    # D1: tf(storm)=2, len=4, avg=2.75
    tf, length, avg = 2, 4, 2.75
    idf = math.log(2.0)
    k1, b = CFG.k1, CFG.b
    expected = idf * (tf * (k1 + 1)) / (tf + k1 * (1 - b + b * length / avg))
    assert tiny_index.bm25_score(CFG, ["storm"], "D1") == pytest.approx(expected, rel=1e-12)


def test_bm25_score_sums_over_query_terms(tiny_index):
    single = tiny_index.bm25_score(CFG, ["storm"], "D4") + tiny_index.bm25_score(
        CFG, ["flood"], "D4"
    )
    both = tiny_index.bm25_score(CFG, ["storm", "flood"], "D4")
    assert both == pytest.approx(single, rel=1e-12)


def test_bm25_repeated_query_term_counts_twice(tiny_index):
    once = tiny_index.bm25_score(CFG, ["storm"], "D1")
    twice = tiny_index.bm25_score(CFG, ["storm", "storm"], "D1")
    assert twice == pytest.approx(2 * once, rel=1e-12)


def test_retrieve_topk_matches_bm25_score(tiny_index):
    results = tiny_index.retrieve_topk(CFG, ["storm", "flood"])
    assert results
    for unit_id, score in results:
        assert score == tiny_index.bm25_score(CFG, ["storm", "flood"], unit_id)
    scores = [s for _, s in results]
    assert scores == sorted(scores, reverse=True)


def test_retrieve_topk_excludes_zero_scores(tiny_index):
    results = tiny_index.retrieve_topk(CFG, ["drought"])
    assert [u for u, _ in results] == ["D2"]


def test_retrieve_topk_ties_break_by_unit_id():
    units = [("B", ["x"]), ("A", ["x"]), ("C", ["x"])]
    idx = Index.build(units)
    results = idx.retrieve_topk(RetrievalConfig(), ["x"])
    assert [u for u, _ in results] == ["A", "B", "C"]
    assert len({s for _, s in results}) == 1


def test_retrieve_topk_caps_at_k(tiny_index):
    cfg = RetrievalConfig(k=1)
    results = tiny_index.retrieve_topk(cfg, ["storm", "flood"])
    assert len(results) == 1


def test_retrieve_topk_unknown_terms(tiny_index):
    assert tiny_index.retrieve_topk(CFG, ["zzz"]) == []
    assert tiny_index.retrieve_topk(CFG, []) == []


def test_build_rejects_duplicate_unit_ids():
    with pytest.raises(ValueError):
        Index.build([("A", ["x"]), ("A", ["y"])])


def test_build_rejects_unknown_unit_kind():
    with pytest.raises(ValueError):
        Index.build([("A", ["x"])], unit_kind="chapter")


def test_empty_index_is_valid():
    idx = Index.build([])
    assert idx.num_units == 0
    assert idx.retrieve_topk(CFG, ["x"]) == []


def test_save_load_round_trip(tmp_path, tiny_index):
    path = tmp_path / "index.txt"
    tiny_index.save(str(path))
    loaded = Index.load(str(path))
    assert loaded.unit_ids == tiny_index.unit_ids
    assert loaded.lengths == tiny_index.lengths
    assert loaded.postings == tiny_index.postings
    assert loaded.unit_kind == tiny_index.unit_kind
    # scores identical after round trip
    for unit_id, score in tiny_index.retrieve_topk(CFG, ["storm", "flood"]):
        assert loaded.bm25_score(CFG, ["storm", "flood"], unit_id) == score


def test_save_is_deterministic(tmp_path, tiny_index):
    p1, p2 = tmp_path / "a.txt", tmp_path / "b.txt"
    tiny_index.save(str(p1))
    tiny_index.save(str(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_load_rejects_foreign_file(tmp_path):
    path = tmp_path / "other.txt"
    path.write_text("not-an-index\t9\n")
    with pytest.raises(ValueError):
        Index.load(str(path))


def test_random_corpus_topk_agrees_with_exhaustive_scoring():
    rng = np.random.Generator(np.random.PCG64(5))
    vocab = [f"t{i}" for i in range(30)]
    units = []
    for i in range(120):
        n = int(rng.integers(3, 40))
        tokens = [vocab[int(j)] for j in rng.integers(0, len(vocab), n)]
        units.append((f"U{i:03d}", tokens))
    idx = Index.build(units)
    cfg = RetrievalConfig(k=25)
    query = ["t0", "t7", "t19"]

    expected = []
    for unit_id, _ in units:
        s = idx.bm25_score(cfg, query, unit_id)
        if s > 0:
            expected.append((unit_id, s))
    expected.sort(key=lambda pair: (-pair[1], pair[0]))
    assert idx.retrieve_topk(cfg, query) == expected[:25]


def test_retrieval_config_validation():
    with pytest.raises(ValueError):
        RetrievalConfig(k1=-0.1)
    with pytest.raises(ValueError):
        RetrievalConfig(b=1.5)
    with pytest.raises(ValueError):
        RetrievalConfig(k=0)
