import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loadscope import corpus
from loadscope._validation import ValidationError
from oracles import brute_dcw, brute_pmi, brute_vector, window_counts

TOY = [["load", "temperature"], ["load", "price"], ["temperature", "sun"]]

words = st.sampled_from(["load", "sun", "gas", "heat", "price", "wind"])
small_corpus = st.lists(st.lists(words, min_size=0, max_size=6), min_size=1, max_size=5).filter(
    lambda docs: any(docs)
)


def test_tokenize_drops_digits_punctuation_and_stopwords():
    assert corpus.tokenize("The Load, in 2020: peaked!", {"the", "in"}) == ["load", "peaked"]


def test_toy_counts():
    s = corpus.build_stats(TOY, window_size=2)
    assert s.total_windows == 3
    assert s.unigram_windows["load"] == 2
    assert s.pair_count("load", "temperature") == 1


def test_repeated_word_counts_once_per_window():
    s = corpus.build_stats([["a", "a", "a"]], window_size=2)
    assert s.unigram_windows["a"] == 2
    assert s.pair_windows == {}


def test_short_document_is_one_window():
    s = corpus.build_stats([["a", "b", "c"]], window_size=10)
    assert s.total_windows == 1
    assert s.pair_count("a", "c") == 1


def test_empty_corpus_rejected():
    with pytest.raises(ValidationError, match="empty corpus"):
        corpus.build_stats([[], []], window_size=3)


def test_toy_pmi():
    s = corpus.build_stats(TOY, window_size=2)
    assert corpus.pmi(s, "load", "temperature") == pytest.approx(math.log(3 / 4), abs=1e-12)
    assert corpus.pmi(s, "load", "temperature") == pytest.approx(-0.2877, abs=1e-4)


def test_pmi_requires_cooccurrence():
    s = corpus.build_stats(TOY, window_size=2)
    with pytest.raises(ValidationError, match="no co-occurrence"):
        corpus.pmi(s, "load", "sun")


def test_pmi_zero_when_word_is_everywhere():
    s = corpus.build_stats([["a", "b"], ["a", "c"]], window_size=2)
    assert corpus.pmi(s, "a", "b") == 0.0


def test_pmi_log2_for_words_always_together():
    s = corpus.build_stats([["a", "b"], ["c", "d"]], window_size=2)
    assert corpus.pmi(s, "a", "b") == pytest.approx(math.log(2), abs=1e-15)
    v = corpus.word_vector(s, "a")
    assert np.count_nonzero(v) == 1
    assert v.max() == pytest.approx(0.6931, abs=1e-4)


def test_word_vector_clips_negative_pmi():
    s = corpus.build_stats(TOY, window_size=2)
    v = corpus.word_vector(s, "load")
    assert v[s.index("temperature")] == 0.0


def test_word_vector_unknown_word():
    s = corpus.build_stats(TOY, window_size=2)
    with pytest.raises(ValidationError, match="out of vocabulary"):
        corpus.word_vector(s, "nope")


def test_isolated_word_has_zero_vector():
    s = corpus.build_stats([["a", "b"], ["c"]], window_size=2)
    assert not corpus.word_vector(s, "c").any()


def test_cosine_examples():
    assert corpus.cosine([3, 4], [3, 4]) == pytest.approx(1.0)
    assert corpus.cosine([1, 0], [0, 1]) == 0.0
    assert corpus.cosine([1, 0], [1, 1]) == pytest.approx(1 / math.sqrt(2))
    with pytest.raises(ValidationError, match="zero vector"):
        corpus.cosine([0, 0], [1, 1])


def test_toy_dcw_is_undefined_under_ppmi_rows():
    # every positive entry of the two PPMI rows sits in a different column
    s = corpus.build_stats(TOY, window_size=2)
    with pytest.raises(ValidationError, match="undefined DCW"):
        corpus.dcw_score(s, "load", "temperature")


def test_dcw_ratio_and_zero_numerator():
    docs = [["load", "heat", "gas"], ["load", "heat", "gas"], ["sun", "wind"], ["load", "gas"], ["heat", "gas"],
            ["sun", "price"]]
    s = corpus.build_stats(docs, window_size=3)
    p = corpus.pmi(s, "load", "heat")
    c = corpus.cosine(corpus.word_vector(s, "load"), corpus.word_vector(s, "heat"))
    assert corpus.dcw_score(s, "load", "heat") == pytest.approx(p / c, abs=1e-15)
    # a and b each fill 3 of 9 windows and share exactly one: P(a, b) = P(a) P(b)
    docs0 = [["a", "b", "c"], ["a", "c"], ["b", "c"], ["a", "g"], ["b", "g"], ["d", "e"], ["d", "e"], ["f", "e"],
             ["f", "d"]]
    s0 = corpus.build_stats(docs0, window_size=3)
    assert corpus.pmi(s0, "a", "b") == 0.0
    assert corpus.dcw_score(s0, "a", "b") == 0.0


def test_rank_threshold_and_tie_break():
    docs = [["load", "x", "y"], ["load", "x", "y"], ["z", "w"]]
    s = corpus.build_stats(docs, window_size=3)
    r = corpus.rank_features(s, "load", 0.1)
    assert [e.word for e in r.entries] == ["x", "y"]  # equal scores, alphabetical
    assert r.entries[0].dcw == r.entries[1].dcw
    assert all(e.kept == (e.dcw > 0.1) for e in r.entries)


def test_rank_anchor_only_vocabulary():
    s = corpus.build_stats([["load", "load"]], window_size=2)
    assert corpus.rank_features(s, "load").entries == []


def test_rank_unknown_anchor():
    s = corpus.build_stats(TOY, window_size=2)
    with pytest.raises(ValidationError):
        corpus.rank_features(s, "missing")


def test_ranking_csv_columns(tmp_path):
    s = corpus.build_stats([["load", "x", "y"], ["load", "x"]], window_size=3)
    path = tmp_path / "dcw.csv"
    corpus.rank_features(s).to_csv(path, "# h\n")
    lines = path.read_text().splitlines()
    assert lines[0] == "# h"
    assert lines[1] == "word,pmi,cosine,dcw,kept"


def test_bundled_corpus_ranks_anchor():
    docs = corpus.read_corpus(corpus.resources.files("loadscope").joinpath("data/corpus"), corpus.default_stopwords())
    r = corpus.rank_features(corpus.build_stats(docs), "load")
    assert r.kept_words


def test_estimator_wraps_ranking():
    est = corpus.DCWRanker(window_size=3).fit(["load heat gas", "load heat", "gas sun", "heat sun gas"])
    assert list(est.get_feature_names_out()) == est.ranking_.kept_words
    assert est.get_params()["window_size"] == 3
    assert est.word_vectors(["heat"]).shape == (1, len(est.stats_.vocab))


@settings(max_examples=60, deadline=None)
@given(small_corpus, st.integers(2, 5))
def test_counts_match_brute_force(docs, size):
    s = corpus.build_stats(docs, size)
    total, vocab, uni, pair = window_counts(docs, size)
    assert s.total_windows == total
    assert list(s.vocab) == vocab
    assert s.unigram_windows == uni
    assert s.pair_windows == pair


@settings(max_examples=40, deadline=None)
@given(small_corpus, st.integers(2, 5))
def test_pmi_vectors_dcw_match_brute_force(docs, size):
    s = corpus.build_stats(docs, size)
    for a in s.vocab:
        np.testing.assert_allclose(corpus.word_vector(s, a), brute_vector(docs, size, a), rtol=0, atol=1e-12)
        for b in s.vocab:
            if a == b:
                continue
            ref = brute_pmi(docs, size, a, b)
            if ref is None:
                continue
            assert abs(corpus.pmi(s, a, b) - ref) <= 1e-12
            assert corpus.pmi(s, a, b) == corpus.pmi(s, b, a)
            expected = brute_dcw(docs, size, a, b)
            if expected is None:
                with pytest.raises(ValidationError):
                    corpus.dcw_score(s, a, b)
            else:
                assert abs(corpus.dcw_score(s, a, b) - expected[2]) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(small_corpus, st.integers(2, 5), st.randoms())
def test_stats_independent_of_document_order(docs, size, rnd):
    shuffled = list(docs)
    rnd.shuffle(shuffled)
    a, b = corpus.build_stats(docs, size), corpus.build_stats(shuffled, size)
    assert a == b
    for (x, y), c in a.pair_windows.items():
        assert c <= min(a.unigram_windows[x], a.unigram_windows[y])


@settings(max_examples=30, deadline=None)
@given(small_corpus, st.integers(2, 5))
def test_corpus_mutual_information_matches_pair_sum(docs, size):
    s = corpus.build_stats(docs, size)
    total, _, _, pair = window_counts(docs, size)
    expected = sum(c / total * brute_pmi(docs, size, a, b) for (a, b), c in pair.items())
    assert abs(corpus.mutual_information(s) - expected) <= 1e-12
