import json
import math
import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from odqa.analysis import AnalyzerKind, terms
from odqa.errors import DuplicateParagraphError, IndexFormatError
from odqa.index import kernels
from odqa.index.core import (
    Index,
    IndexBuilder,
    IndexConfig,
    Paragraph,
    build_index,
    segment_document,
)

from conftest import make_word_soup_corpus, make_word_soup_queries
from oracles import bm25_brute_force

CFG = IndexConfig(analyzer=AnalyzerKind.ENGLISH_LOWER, min_paragraph_chars=0)


def en_terms(text):
    return terms(text, AnalyzerKind.ENGLISH_LOWER)


class TestSegmentDocument:
    def test_blank_line_split(self):
        paras = segment_document("d1", "A.\n\nB.", CFG)
        assert paras == [Paragraph("d1", 0, "A."), Paragraph("d1", 1, "B.")]

    def test_empty_body(self):
        assert segment_document("d1", "", CFG) == []

    def test_min_chars_filter_reindexes(self):
        cfg = IndexConfig(min_paragraph_chars=5)
        paras = segment_document("d1", "xx\n\nlong paragraph here", cfg)
        assert paras == [Paragraph("d1", 0, "long paragraph here")]

    def test_many_newlines_one_separator(self):
        paras = segment_document("d", "first one\n\n\n\nsecond one", CFG)
        assert [p.text for p in paras] == ["first one", "second one"]

    def test_whitespace_only_chunk_dropped(self):
        assert segment_document("d", "  \n\nreal text", CFG) == [Paragraph("d", 0, "real text")]


class TestBuildIndex:
    def test_counting(self):
        idx = build_index(
            [Paragraph("d", 0, "a"), Paragraph("d", 1, "b"), Paragraph("d", 2, "a")], CFG
        )
        assert idx.n == 3
        assert idx.df("a") == 2
        assert idx.df("b") == 1
        assert idx.avg_length == 1.0

    def test_empty_stream(self):
        idx = build_index([], CFG)
        assert idx.n == 0
        assert idx.search("anything", 5) == []

    def test_duplicate_rejected_with_ids(self):
        builder = IndexBuilder(CFG)
        builder.add(Paragraph("d7", 3, "some text"))
        with pytest.raises(DuplicateParagraphError, match=r"d7.*3"):
            builder.add(Paragraph("d7", 3, "other text"))

    def test_stats_match_brute_force(self):
        corpus = make_word_soup_corpus()
        idx = build_index(corpus, CFG)
        ordered = sorted(corpus, key=lambda p: (p.doc_id, p.para_id))
        token_lists = [en_terms(p.text) for p in ordered]
        assert idx.n == len(corpus)
        assert list(idx.lengths) == [len(t) for t in token_lists]
        assert idx.avg_length == pytest.approx(
            sum(len(t) for t in token_lists) / len(corpus)
        )
        df = Counter()
        for toks in token_lists:
            for t in set(toks):
                df[t] += 1
        assert {t: idx.df(t) for t in df} == dict(df)
        assert set(idx.vocab) == set(df)


class TestSearch:
    def test_unknown_terms_only(self):
        idx = build_index([Paragraph("d", 0, "hello world")], CFG)
        assert idx.search("zzz qqq", 5) == []

    def test_k_zero(self):
        idx = build_index([Paragraph("d", 0, "hello world")], CFG)
        assert idx.search("hello", 0) == []

    def test_single_paragraph_hand_score(self):
        # N=1, df=1, tf=1, len=avglen: score reduces to the idf term,
        # ln(1 + 0.5/1.5) = ln(4/3). Confirmed by the brute-force oracle.
        idx = build_index([Paragraph("d", 0, "hello")], IndexConfig(k1=0.9, b=0.4))
        results = idx.search("hello", 5)
        assert len(results) == 1
        expected = math.log(4.0 / 3.0)
        assert results[0].retriever_score == pytest.approx(expected, rel=1e-12)
        oracle = bm25_brute_force(["hello"], "hello", en_terms, 0.9, 0.4)
        assert oracle == [(0, pytest.approx(expected, rel=1e-12))]

    def test_matches_brute_force_on_toy_corpus(self):
        corpus = make_word_soup_corpus(n_paragraphs=20)
        queries = make_word_soup_queries(n_queries=10)
        idx = build_index(corpus, CFG)
        ordered = sorted(corpus, key=lambda p: (p.doc_id, p.para_id))
        texts = [p.text for p in ordered]
        for query in queries:
            expected = bm25_brute_force(texts, query, en_terms, CFG.k1, CFG.b)
            got = idx.search(query, len(corpus))
            assert [(ordered[i].doc_id, ordered[i].para_id) for i, _ in expected] == [
                (r.paragraph.doc_id, r.paragraph.para_id) for r in got
            ]
            for (_, score), r in zip(expected, got):
                assert r.retriever_score == pytest.approx(score, rel=1e-9)
            assert [r.rank for r in got] == list(range(1, len(got) + 1))

    def test_duplicate_query_terms_scored_once(self):
        idx = build_index([Paragraph("d", 0, "apple banana")], CFG)
        single = idx.search("apple", 1)[0].retriever_score
        repeated = idx.search("apple apple apple", 1)[0].retriever_score
        assert repeated == single

    def test_prefix_property(self):
        corpus = make_word_soup_corpus()
        idx = build_index(corpus, CFG)
        for query in make_word_soup_queries(n_queries=5):
            full = idx.search(query, 20)
            for k in (1, 3, 7):
                assert idx.search(query, k) == full[:k]

    def test_scores_non_increasing_and_ranks_dense(self, planted_index):
        results = planted_index.search("survey field report", 30)
        assert len(results) == 30
        for a, b in zip(results, results[1:]):
            assert a.retriever_score >= b.retriever_score
        assert [r.rank for r in results] == list(range(1, 31))

    def test_tie_break_by_doc_then_para(self):
        # identical paragraphs -> identical scores -> (doc_id, para_id) order
        corpus = [
            Paragraph("b", 1, "same words here"),
            Paragraph("a", 1, "same words here"),
            Paragraph("b", 0, "same words here"),
            Paragraph("a", 0, "same words here"),
        ]
        idx = build_index(corpus, CFG)
        got = [(r.paragraph.doc_id, r.paragraph.para_id) for r in idx.search("same", 10)]
        assert got == [("a", 0), ("a", 1), ("b", 0), ("b", 1)]

    def test_build_order_does_not_matter(self):
        corpus = make_word_soup_corpus()
        shuffled = list(corpus)
        random.Random(3).shuffle(shuffled)
        a = build_index(corpus, CFG)
        b = build_index(shuffled, CFG)
        for query in make_word_soup_queries(n_queries=5):
            assert a.search(query, 20) == b.search(query, 20)


@given(
    tf=st.integers(min_value=1, max_value=50),
    extra_len=st.integers(min_value=0, max_value=100),
    avglen=st.floats(min_value=1.0, max_value=500.0),
    k1=st.floats(min_value=0.01, max_value=3.0),
    b=st.floats(min_value=0.0, max_value=1.0),
    idf=st.floats(min_value=0.0, max_value=10.0),
)
def test_term_frequency_monotonicity(tf, extra_len, avglen, k1, b, idf):
    # adding one occurrence of the term (df and avglen held fixed) never lowers
    # the paragraph's contribution, even though its length grows by one
    def contribution(tf_, len_):
        norm = k1 * (1.0 - b + b * len_ / avglen)
        return idf * tf_ * (k1 + 1.0) / (tf_ + norm)

    length = tf + extra_len
    assert contribution(tf + 1, length + 1) >= contribution(tf, length) - 1e-12


class TestBackends:
    def test_pure_python_matches_compiled_exactly(self):
        if "cython" not in kernels.available_backends():
            pytest.skip("compiled kernel not built")
        corpus = make_word_soup_corpus(n_paragraphs=20)
        idx = build_index(corpus, CFG)
        queries = make_word_soup_queries(n_queries=10)
        previous = kernels.active_backend()
        try:
            kernels.use_backend("cython")
            compiled = [idx.search(q, 20) for q in queries]
            kernels.use_backend("python")
            pure = [idx.search(q, 20) for q in queries]
        finally:
            kernels.use_backend(previous)
        assert compiled == pure  # including bit-identical scores

    def test_unknown_backend_rejected(self):
        with pytest.raises(ValueError, match="unknown scoring backend"):
            kernels.use_backend("fortran")


class TestPersistence:
    def test_round_trip_replays_identically(self, tmp_path):
        corpus = make_word_soup_corpus()
        idx = build_index(corpus, CFG)
        idx.save(tmp_path / "ix")
        reopened = Index.open(tmp_path / "ix")
        assert reopened.config == idx.config
        for query in make_word_soup_queries(n_queries=10):
            assert reopened.search(query, 20) == idx.search(query, 20)

    def test_version_mismatch(self, tmp_path):
        build_index([Paragraph("d", 0, "hello")], CFG).save(tmp_path / "ix")
        meta_path = tmp_path / "ix" / "meta.json"
        meta = json.loads(meta_path.read_text())
        meta["version"] = 99
        meta_path.write_text(json.dumps(meta))
        with pytest.raises(IndexFormatError, match="version"):
            Index.open(tmp_path / "ix")

    def test_wrong_format_tag(self, tmp_path):
        build_index([Paragraph("d", 0, "hello")], CFG).save(tmp_path / "ix")
        meta_path = tmp_path / "ix" / "meta.json"
        meta = json.loads(meta_path.read_text())
        meta["format"] = "something-else"
        meta_path.write_text(json.dumps(meta))
        with pytest.raises(IndexFormatError):
            Index.open(tmp_path / "ix")

    def test_missing_directory(self, tmp_path):
        with pytest.raises(IndexFormatError, match="meta.json"):
            Index.open(tmp_path / "nowhere")

    def test_corrupt_meta(self, tmp_path):
        build_index([Paragraph("d", 0, "hello")], CFG).save(tmp_path / "ix")
        (tmp_path / "ix" / "meta.json").write_text("{not json")
        with pytest.raises(IndexFormatError, match="corrupt"):
            Index.open(tmp_path / "ix")

    def test_corrupt_postings(self, tmp_path):
        build_index([Paragraph("d", 0, "hello")], CFG).save(tmp_path / "ix")
        (tmp_path / "ix" / "posting_ids.npy").write_bytes(b"garbage")
        with pytest.raises(IndexFormatError):
            Index.open(tmp_path / "ix")

    def test_cjk_round_trip(self, tmp_path):
        cfg = IndexConfig(analyzer=AnalyzerKind.CJK_BIGRAM, min_paragraph_chars=0)
        idx = build_index([Paragraph("zh", 0, "北京大学在北京。"), Paragraph("zh", 1, "上海很大。")], cfg)
        idx.save(tmp_path / "zh-ix")
        reopened = Index.open(tmp_path / "zh-ix")
        assert reopened.search("北京", 5) == idx.search("北京", 5)
        assert reopened.search("北京", 5)[0].paragraph.para_id == 0


def test_norms_are_float64_and_match_definition(planted_index):
    idx = planted_index
    assert idx.norms.dtype == np.float64
    expected = idx.config.k1 * (
        1.0 - idx.config.b + idx.config.b * idx.lengths.astype(float) / idx.avg_length
    )
    assert np.array_equal(idx.norms, expected)
