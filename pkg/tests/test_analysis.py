import math
import random

import numpy as np
import pytest

from topicmod.analysis import lexical_stats, pmi_bigrams, top_topics, topic_overlap

from helpers import corpus_of, msttr_oracle, pmi_oracle


class FakeTopicModel:
    def __init__(self, n_topics=6):
        self.n_topics = n_topics

    def top_words(self, k, n=10):
        return [f"t{k}w{i}" for i in range(n)]


def random_corpus(seed, n_comments=40, vocab=20, max_len=30):
    rng = random.Random(seed)
    texts = []
    for _ in range(n_comments):
        length = rng.randint(1, max_len)
        texts.append(" ".join(f"v{rng.randrange(vocab)}" for _ in range(length)))
    return corpus_of(texts)


class TestLexicalStats:
    def test_all_unique_segment(self):
        text = " ".join(f"tok{i}" for i in range(1000))
        stats = lexical_stats(corpus_of([text]), segment_size=1000)
        assert stats.msttr == 1.0
        assert not stats.partial_segment

    def test_single_repeated_token(self):
        stats = lexical_stats(corpus_of([" ".join(["a"] * 2000)]),
                              segment_size=1000)
        assert stats.msttr == pytest.approx(0.001, abs=0)

    def test_partial_only_segment_flagged(self):
        stats = lexical_stats(corpus_of(["a b a"]), segment_size=1000)
        assert stats.partial_segment
        assert stats.msttr == pytest.approx(2 / 3)

    def test_mean_length(self):
        stats = lexical_stats(corpus_of(["a b", "c d e f"]), segment_size=10)
        assert stats.mean_length == 3.0
        assert stats.n_comments == 2
        assert stats.n_tokens == 6

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_oracle(self, seed):
        corpus = random_corpus(seed)
        for segment_size in (7, 50, 1000):
            got = lexical_stats(corpus, segment_size).msttr
            assert got == pytest.approx(msttr_oracle(corpus, segment_size),
                                        abs=1e-12)

    def test_deterministic_in_corpus_order(self):
        corpus = random_corpus(3)
        assert lexical_stats(corpus, 13) == lexical_stats(corpus, 13)


class TestPmiBigrams:
    def test_hand_computed_value(self):
        corpus = corpus_of(["a b"] * 100)
        [ranked] = pmi_bigrams(corpus, min_count=1)
        assert ranked.bigram == ("a", "b")
        assert ranked.count == 100
        assert ranked.pmi == pytest.approx(math.log(4), abs=1e-12)

    def test_threshold_boundary(self):
        corpus = corpus_of(["x y"] * 49)
        assert pmi_bigrams(corpus, min_count=50) == []
        assert len(pmi_bigrams(corpus, min_count=49)) == 1

    def test_all_distinct_tokens(self):
        corpus = corpus_of([f"u{i} v{i}" for i in range(60)])
        assert pmi_bigrams(corpus, min_count=50) == []

    def test_no_cross_comment_bigrams(self):
        corpus = corpus_of(["a b", "b a"])
        pairs = {rb.bigram for rb in pmi_bigrams(corpus, min_count=1)}
        assert pairs == {("a", "b"), ("b", "a")}

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_oracle(self, seed):
        corpus = random_corpus(seed, n_comments=30, vocab=8, max_len=25)
        expected = pmi_oracle(corpus, min_count=3)
        got = pmi_bigrams(corpus, min_count=3)
        assert {rb.bigram for rb in got} == set(expected)
        for rb in got:
            count, pmi = expected[rb.bigram]
            assert rb.count == count
            assert rb.pmi == pytest.approx(pmi, abs=1e-12)

    def test_sorted_by_pmi_then_count(self):
        corpus = random_corpus(11, n_comments=50, vocab=6, max_len=20)
        ranked = pmi_bigrams(corpus, min_count=2)
        keys = [(-rb.pmi, -rb.count, rb.bigram) for rb in ranked]
        assert keys == sorted(keys)


class TestTopTopics:
    def test_one_hot(self):
        theta = np.zeros(10)
        theta[7] = 1.0
        assert top_topics([theta], k=1) == [7]

    def test_tie_by_id(self):
        a, b = np.zeros(8), np.zeros(8)
        a[3] = 1.0
        b[5] = 1.0
        assert top_topics([a, b], k=2) == [3, 5]

    def test_identical_thetas(self):
        rng = np.random.default_rng(0)
        theta = rng.dirichlet(np.ones(20))
        expected = sorted(range(20), key=lambda i: (-theta[i], i))[:15]
        assert top_topics([theta] * 5, k=15) == expected

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            top_topics([], k=3)


class TestTopicOverlap:
    def test_set_algebra(self):
        report = topic_overlap([1, 2], [2, 3], FakeTopicModel())
        assert report.only_a == {1}
        assert report.shared == {2}
        assert report.only_b == {3}
        assert set(report.labels) == {1, 2, 3}

    def test_identical(self):
        report = topic_overlap([1, 2], [1, 2], FakeTopicModel())
        assert report.shared == {1, 2}
        assert not report.only_a and not report.only_b

    def test_disjoint(self):
        report = topic_overlap([0, 1], [2, 3], FakeTopicModel())
        assert not report.shared
        assert report.only_a == {0, 1}
        assert report.only_b == {2, 3}
