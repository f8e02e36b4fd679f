"""Shared test utilities: independent oracles and synthetic corpus generators.

The oracles here are deliberately naive (explicit loops, re-counting from
scratch) so they stay independent of the library code they check.
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

import numpy as np

from topicmod.corpus import Comment, CommentCorpus, Vocabulary, tokenize


# ---------------------------------------------------------------------------
# corpus construction helpers


def make_comment(i, text, label=0, rule=None, section="", subsection=None):
    return Comment(id=f"c{i}", text=text, label=label, rule=rule,
                   section=section, subsection=subsection,
                   article_id=f"a{i}", timestamp="2018-01-01T00:00:00")


def corpus_of(texts, labels=None, sections=None):
    labels = labels or [0] * len(texts)
    sections = sections or [""] * len(texts)
    return CommentCorpus(tuple(
        make_comment(i, t, label=l, section=s)
        for i, (t, l, s) in enumerate(zip(texts, labels, sections))))


def write_jsonl(path: Path, comments) -> Path:
    with path.open("w", encoding="utf-8") as fh:
        for c in comments:
            fh.write(json.dumps({
                "id": c.id, "text": c.text, "label": c.label, "rule": c.rule,
                "section": c.section, "subsection": c.subsection,
                "article_id": c.article_id, "timestamp": c.timestamp}) + "\n")
    return path


# ---------------------------------------------------------------------------
# brute-force oracles


def msttr_oracle(corpus, segment_size):
    """Recompute MSTTR with explicit segment slicing."""
    stream = []
    for c in corpus:
        stream.extend(tokenize(c.text))
    if len(stream) < segment_size:
        return len(set(stream)) / len(stream) if stream else 0.0
    n_segments = len(stream) // segment_size
    total = 0.0
    for s in range(n_segments):
        seg = stream[s * segment_size:(s + 1) * segment_size]
        total += len(set(seg)) / segment_size
    return total / n_segments


def pmi_oracle(corpus, min_count):
    """Recount unigrams/bigrams by hand and recompute natural-log PMI."""
    unigrams, bigrams = {}, {}
    n_uni = n_bi = 0
    for c in corpus:
        tokens = tokenize(c.text)
        for t in tokens:
            unigrams[t] = unigrams.get(t, 0) + 1
            n_uni += 1
        for i in range(len(tokens) - 1):
            pair = (tokens[i], tokens[i + 1])
            bigrams[pair] = bigrams.get(pair, 0) + 1
            n_bi += 1
    out = {}
    for pair, count in bigrams.items():
        if count < min_count:
            continue
        x, y = pair
        pmi = math.log((count / n_bi) /
                       ((unigrams[x] / n_uni) * (unigrams[y] / n_uni)))
        out[pair] = (count, pmi)
    return out


def macro_f1_oracle(preds, gold):
    """Per-class F1 via an explicit confusion matrix, averaged."""
    f1s = []
    for cls in (0, 1):
        tp = sum(1 for p, g in zip(preds, gold) if p == cls and g == cls)
        fp = sum(1 for p, g in zip(preds, gold) if p == cls and g != cls)
        fn = sum(1 for p, g in zip(preds, gold) if p != cls and g == cls)
        if tp == 0:
            f1s.append(0.0)
        else:
            prec, rec = tp / (tp + fp), tp / (tp + fn)
            f1s.append(2 * prec * rec / (prec + rec))
    return 100.0 * sum(f1s) / 2


def dte_oracle(alpha, theta):
    """theta-weighted topic-embedding sum via an explicit double loop."""
    K, D = alpha.shape
    out = np.zeros(D)
    for d in range(D):
        for k in range(K):
            out[d] += alpha[k, d] * theta[k]
    return out


# ---------------------------------------------------------------------------
# synthetic corpora


def planted_topic_words(n_topics, vocab_size):
    """Disjoint word sets, one per planted topic."""
    per_topic = vocab_size // n_topics
    words = [f"w{i:03d}" for i in range(vocab_size)]
    return [words[k * per_topic:(k + 1) * per_topic] for k in range(n_topics)]


def planted_topic_corpus(n_docs=2000, n_topics=5, vocab_size=200,
                         doc_len=40, seed=0):
    """Documents drawn from sparse mixtures of planted disjoint topics.

    Returns (corpus, topic_word_sets).  Each document picks one dominant
    topic (85% of tokens) plus background noise from the others.
    """
    rng = random.Random(seed)
    topic_words = planted_topic_words(n_topics, vocab_size)
    comments = []
    for i in range(n_docs):
        dominant = rng.randrange(n_topics)
        tokens = []
        for _ in range(doc_len):
            if rng.random() < 0.85:
                tokens.append(rng.choice(topic_words[dominant]))
            else:
                tokens.append(rng.choice(topic_words[rng.randrange(n_topics)]))
        comments.append(make_comment(i, " ".join(tokens), label=dominant % 2))
    return CommentCorpus(tuple(comments)), [set(ws) for ws in topic_words]


def clustered_embeddings(vocab, topic_word_sets, dim=32, seed=0, noise=0.8):
    """Embeddings with per-topic cluster structure, standing in for the
    pretrained vectors the real pipeline would load."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(0, 1.0, (len(topic_word_sets), dim))
    matrix = np.empty((len(vocab), dim), dtype=np.float32)
    for idx, token in enumerate(vocab.id_to_token):
        center = np.zeros(dim)
        for j, words in enumerate(topic_word_sets):
            if token in words:
                center = centers[j]
                break
        matrix[idx] = center + rng.normal(0, noise, dim)
    from topicmod.etm import WordEmbeddings
    return WordEmbeddings(matrix=matrix)


def max_rel_grad_error(model, loss, h=1e-6):
    """Largest per-parameter relative error between backprop gradients and
    central finite differences of ``loss`` (a zero-argument callable)."""
    import torch

    model.zero_grad()
    loss().backward()
    worst = 0.0
    for param in model.parameters():
        if param.grad is None:
            continue
        analytic = param.grad.detach().clone().reshape(-1)
        flat = param.data.reshape(-1)
        numeric = torch.zeros_like(analytic)
        for i in range(flat.numel()):
            orig = flat[i].item()
            flat[i] = orig + h
            up = loss().item()
            flat[i] = orig - h
            down = loss().item()
            flat[i] = orig
            numeric[i] = (up - down) / (2 * h)
        denom = max(numeric.norm().item(), 1e-8)
        worst = max(worst, (analytic - numeric).norm().item() / denom)
    return worst


def topic_recovery_overlap(model, topic_word_sets, top_n=10):
    """Greedy matching of trained topics to planted ones by top-word overlap.

    Returns the mean overlap fraction over planted topics.
    """
    n_planted = len(topic_word_sets)
    overlaps = np.zeros((model.n_topics, n_planted))
    for k in range(model.n_topics):
        top = set(model.top_words(k, top_n))
        for j, planted in enumerate(topic_word_sets):
            overlaps[k, j] = len(top & planted) / top_n
    used_model, used_planted = set(), set()
    total = 0.0
    for _ in range(n_planted):
        best = None
        for k in range(model.n_topics):
            if k in used_model:
                continue
            for j in range(n_planted):
                if j in used_planted:
                    continue
                if best is None or overlaps[k, j] > overlaps[best]:
                    best = (k, j)
        used_model.add(best[0])
        used_planted.add(best[1])
        total += overlaps[best]
    return total / n_planted


def fusion_benefit_corpus(n_docs=3000, seed=0, prefix_len=12, body_len=28):
    """Corpus where the blocked label needs both topic and text evidence.

    Each comment is a prefix of neutral filler tokens followed by a body
    drawn from either a "spam" or a "clean" word distribution.  Every
    comment contains exactly one "trigger" token, either inside the prefix
    or hidden in the body.  The label is 1 only for spam-topic comments
    with the trigger in the prefix.

    With the classifier's max_seq_len capped at the prefix length, the text
    path sees only trigger-in-prefix (filler is topic-independent), while
    the bag-of-words topic path sees the body mixture but a constant
    trigger count, so neither feature alone separates the classes.
    """
    rng = random.Random(seed)
    filler = [f"f{i}" for i in range(20)]
    spam_words = [f"s{i}" for i in range(15)]
    clean_words = [f"c{i}" for i in range(15)]
    comments = []
    for i in range(n_docs):
        r = rng.random()
        if r < 0.30:
            topic, trigger = "spam", True
        elif r < 0.55:
            topic, trigger = "spam", False
        elif r < 0.80:
            topic, trigger = "clean", True
        else:
            topic, trigger = "clean", False
        label = int(topic == "spam" and trigger)
        prefix = [rng.choice(filler) for _ in range(prefix_len)]
        body_words = spam_words if topic == "spam" else clean_words
        body = [rng.choice(body_words) for _ in range(body_len)]
        # exactly one trigger per comment: position is the only signal
        if trigger:
            prefix[rng.randrange(prefix_len)] = "trigger"
        else:
            body[rng.randrange(body_len)] = "trigger"
        comments.append(make_comment(i, " ".join(prefix + body), label=label,
                                     section="Synth"))
    return CommentCorpus(tuple(comments))
