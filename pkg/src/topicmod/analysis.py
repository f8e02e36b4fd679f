"""Corpus forensics: length stats, MSTTR, PMI bigrams, and topic overlap."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .corpus import CommentCorpus, tokenize


@dataclass(frozen=True)
class LexicalStats:
    mean_length: float
    msttr: float
    n_comments: int
    n_tokens: int
    partial_segment: bool = False

    def to_dict(self) -> dict:
        return {
            "mean_length": self.mean_length,
            "msttr": self.msttr,
            "n_comments": self.n_comments,
            "n_tokens": self.n_tokens,
            "partial_segment": self.partial_segment,
        }


@dataclass(frozen=True)
class RankedBigram:
    bigram: tuple[str, str]
    count: int
    pmi: float


@dataclass(frozen=True)
class TopicOverlapReport:
    only_a: frozenset[int]
    shared: frozenset[int]
    only_b: frozenset[int]
    labels: dict[int, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "only_a": sorted(self.only_a),
            "shared": sorted(self.shared),
            "only_b": sorted(self.only_b),
            "labels": {str(k): v for k, v in sorted(self.labels.items())},
        }


def lexical_stats(subset: CommentCorpus, segment_size: int = 1000) -> LexicalStats:
    """Mean comment length and mean-segmental type-token ratio.

    The MSTTR is the mean, over complete non-overlapping segments of the
    concatenated token stream (in corpus order), of distinct-type fraction
    per segment.  A trailing partial segment is discarded unless it is the
    only one, in which case it is used and flagged.
    """
    if segment_size < 1:
        raise ValueError("segment_size must be >= 1")
    stream: list[str] = []
    for comment in subset:
        stream.extend(tokenize(comment.text))
    n_tokens = len(stream)
    n_comments = len(subset)
    mean_length = n_tokens / n_comments if n_comments else 0.0

    partial = False
    if n_tokens == 0:
        msttr = 0.0
        partial = True
    elif n_tokens < segment_size:
        msttr = len(set(stream)) / n_tokens
        partial = True
    else:
        ratios = []
        for start in range(0, n_tokens - segment_size + 1, segment_size):
            segment = stream[start:start + segment_size]
            ratios.append(len(set(segment)) / segment_size)
        msttr = sum(ratios) / len(ratios)
    return LexicalStats(mean_length=mean_length, msttr=msttr,
                        n_comments=n_comments, n_tokens=n_tokens,
                        partial_segment=partial)


def pmi_bigrams(subset: CommentCorpus, min_count: int = 50) -> list[RankedBigram]:
    """Within-comment bigrams above ``min_count``, ranked by PMI (natural log)."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    unigrams: Counter[str] = Counter()
    bigrams: Counter[tuple[str, str]] = Counter()
    for comment in subset:
        tokens = tokenize(comment.text)
        unigrams.update(tokens)
        bigrams.update(zip(tokens, tokens[1:]))
    n_uni = sum(unigrams.values())
    n_bi = sum(bigrams.values())
    if n_bi == 0:
        return []

    ranked = []
    for (x, y), count in bigrams.items():
        if count < min_count:
            continue
        p_xy = count / n_bi
        p_x = unigrams[x] / n_uni
        p_y = unigrams[y] / n_uni
        ranked.append(RankedBigram(bigram=(x, y), count=count,
                                   pmi=math.log(p_xy / (p_x * p_y))))
    ranked.sort(key=lambda b: (-b.pmi, -b.count, b.bigram))
    return ranked


def top_topics(dtds: list[np.ndarray], k: int = 15) -> list[int]:
    """Top-k topic ids of the mean topic distribution, ties broken by id."""
    if not dtds:
        raise ValueError("need at least one topic distribution")
    mean = np.mean(np.stack([np.asarray(d, dtype=np.float64) for d in dtds]), axis=0)
    if k > mean.shape[0]:
        raise ValueError(f"k={k} exceeds topic count {mean.shape[0]}")
    order = sorted(range(mean.shape[0]), key=lambda i: (-mean[i], i))
    return order[:k]


def topic_overlap(top_a: list[int], top_b: list[int], model) -> TopicOverlapReport:
    """Set algebra over two top-topic lists, annotated with top-10 words."""
    set_a, set_b = set(top_a), set(top_b)
    labels = {k: " ".join(model.top_words(k, 10)) for k in sorted(set_a | set_b)}
    return TopicOverlapReport(
        only_a=frozenset(set_a - set_b),
        shared=frozenset(set_a & set_b),
        only_b=frozenset(set_b - set_a),
        labels=labels,
    )
