"""Comment corpus loading, tokenization, filtering, sampling, and vocabulary."""

from __future__ import annotations

import csv
import json
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional


class CorpusError(ValueError):
    """Raised for malformed corpus files or invalid sampling requests."""


URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
WORD_RE = re.compile(r"\w+", re.UNICODE)

URL_TOKEN = "<url>"


@dataclass(frozen=True)
class Comment:
    """One reader comment with its moderation label and article linkage."""

    id: str
    text: str
    label: int
    rule: Optional[int] = None
    section: str = ""
    subsection: Optional[str] = None
    article_id: str = ""
    timestamp: str = ""

    def __post_init__(self):
        if self.label not in (0, 1):
            raise CorpusError(f"label must be 0 or 1, got {self.label!r}")
        if not self.text:
            raise CorpusError("comment text must be non-empty")
        if self.rule is not None and self.label != 1:
            raise CorpusError("rule may only be set on blocked comments")

    @property
    def is_spam(self) -> bool:
        """Blocked under rule 1, which the moderation policy reserves for spam."""
        return self.label == 1 and self.rule == 1


@dataclass(frozen=True)
class CommentCorpus:
    """Ordered, immutable collection of comments."""

    comments: tuple[Comment, ...]

    def __len__(self) -> int:
        return len(self.comments)

    def __iter__(self) -> Iterator[Comment]:
        return iter(self.comments)

    def __getitem__(self, i) -> Comment:
        return self.comments[i]

    @property
    def blocking_rate(self) -> float:
        if not self.comments:
            return 0.0
        return sum(c.label for c in self.comments) / len(self.comments)

    def subset(self, predicate) -> "CommentCorpus":
        return CommentCorpus(tuple(c for c in self.comments if predicate(c)))

    def sections(self) -> list[str]:
        seen = dict.fromkeys(c.section for c in self.comments if c.section)
        return list(seen)


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; URLs collapse to a single ``<url>`` sentinel."""
    text = URL_RE.sub(f" {URL_TOKEN} ", text)
    tokens = []
    for piece in text.split():
        if piece == URL_TOKEN:
            tokens.append(URL_TOKEN)
            continue
        tokens.extend(m.group(0) for m in WORD_RE.finditer(piece.lower()))
    return tokens


def _comment_from_record(record: dict, lineno: int) -> Comment:
    try:
        label = int(record["label"])
        rule = record.get("rule")
        rule = int(rule) if rule not in (None, "") else None
        return Comment(
            id=str(record["id"]),
            text=str(record["text"]),
            label=label,
            rule=rule,
            section=str(record.get("section") or ""),
            subsection=record.get("subsection") or None,
            article_id=str(record.get("article_id") or ""),
            timestamp=str(record.get("timestamp") or ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusError(f"malformed record at line {lineno}: {exc}") from exc


_TSV_UNESCAPES = {"\\t": "\t", "\\n": "\n", "\\\\": "\\"}


def _tsv_unescape(value: str) -> str:
    return re.sub(r"\\[tn\\]", lambda m: _TSV_UNESCAPES[m.group(0)], value)


def load_corpus(path: str | Path, format: str = "jsonl") -> CommentCorpus:
    """Load a corpus from a JSONL or TSV file, preserving input order."""
    path = Path(path)
    comments: list[Comment] = []
    seen_ids: set[str] = set()

    if format == "jsonl":
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"malformed record at line {lineno}: {exc}") from exc
                comments.append(_comment_from_record(record, lineno))
    elif format == "tsv":
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh, delimiter="\t")
            try:
                header = next(reader)
            except StopIteration:
                raise CorpusError("empty corpus") from None
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise CorpusError(f"malformed record at line {lineno}: expected "
                                      f"{len(header)} fields, got {len(row)}")
                record = dict(zip(header, row))
                record["text"] = _tsv_unescape(record.get("text", ""))
                for key in ("rule", "subsection"):
                    if record.get(key) == "":
                        record[key] = None
                comments.append(_comment_from_record(record, lineno))
    else:
        raise CorpusError(f"unknown corpus format {format!r}")

    for c in comments:
        if c.id in seen_ids:
            raise CorpusError(f"duplicate comment id {c.id!r}")
        seen_ids.add(c.id)
    if not comments:
        raise CorpusError("empty corpus")
    return CommentCorpus(tuple(comments))


def filter_min_length(corpus: CommentCorpus, min_tokens: int) -> CommentCorpus:
    """Keep comments with at least ``min_tokens`` tokens, preserving order."""
    if min_tokens < 1:
        raise CorpusError("min_tokens must be >= 1")
    return corpus.subset(lambda c: len(tokenize(c.text)) >= min_tokens)


def _split_by_class(corpus: CommentCorpus) -> tuple[list[Comment], list[Comment]]:
    blocked = [c for c in corpus if c.label == 1]
    non_blocked = [c for c in corpus if c.label == 0]
    return blocked, non_blocked


def _sample_counts(corpus: CommentCorpus, n_blocked: int, n_non_blocked: int,
                   seed: int) -> CommentCorpus:
    blocked, non_blocked = _split_by_class(corpus)
    if len(blocked) < n_blocked:
        raise CorpusError(f"need {n_blocked} blocked comments, have {len(blocked)} "
                          f"(short by {n_blocked - len(blocked)})")
    if len(non_blocked) < n_non_blocked:
        raise CorpusError(f"need {n_non_blocked} non-blocked comments, have "
                          f"{len(non_blocked)} (short by {n_non_blocked - len(non_blocked)})")
    rng = random.Random(seed)
    chosen = set()
    chosen.update(c.id for c in rng.sample(blocked, n_blocked))
    chosen.update(c.id for c in rng.sample(non_blocked, n_non_blocked))
    return corpus.subset(lambda c: c.id in chosen)


def sample_topic_train(corpus: CommentCorpus, n: int, seed: int) -> CommentCorpus:
    """Sample n comments with a roughly equal blocked/non-blocked split."""
    n_blocked = n // 2
    n_non_blocked = n - n_blocked
    # odd n: which class gets the extra comment is part of the seeded draw
    if n % 2 == 1 and random.Random(seed).random() < 0.5:
        n_blocked, n_non_blocked = n_non_blocked, n_blocked
    return _sample_counts(corpus, n_blocked, n_non_blocked, seed)


def sample_classifier_train(corpus: CommentCorpus, n: int, target_rate: float,
                            seed: int) -> CommentCorpus:
    """Sample n comments whose blocked fraction matches ``target_rate``."""
    if not 0.0 <= target_rate <= 1.0:
        raise CorpusError("target_rate must be in [0, 1]")
    n_blocked = int(round(n * target_rate))
    return _sample_counts(corpus, n_blocked, n - n_blocked, seed)


@dataclass(frozen=True)
class Vocabulary:
    """Dense token <-> id bijection with per-token corpus frequencies."""

    id_to_token: tuple[str, ...]
    counts: tuple[int, ...]
    token_to_id: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.token_to_id:
            object.__setattr__(self, "token_to_id",
                               {t: i for i, t in enumerate(self.id_to_token)})

    @property
    def size(self) -> int:
        return len(self.id_to_token)

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def save(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for token in self.id_to_token:
                fh.write(token + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        tokens = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(id_to_token=tuple(tokens), counts=tuple(0 for _ in tokens))


def build_vocabulary(corpus: CommentCorpus, min_count: int = 5,
                     max_doc_frac: float = 0.7) -> Vocabulary:
    """Frequency-ordered vocabulary with count and document-frequency cutoffs."""
    if min_count < 1:
        raise CorpusError("min_count must be >= 1")
    if not 0.0 < max_doc_frac <= 1.0:
        raise CorpusError("max_doc_frac must be in (0, 1]")
    counts: Counter[str] = Counter()
    doc_freq: Counter[str] = Counter()
    for c in corpus:
        tokens = tokenize(c.text)
        counts.update(tokens)
        doc_freq.update(set(tokens))
    max_df = max_doc_frac * len(corpus)
    kept = [t for t, n in counts.items() if n >= min_count and doc_freq[t] <= max_df]
    if not kept:
        raise CorpusError("vocabulary is empty after thresholding")
    kept.sort(key=lambda t: (-counts[t], t))
    return Vocabulary(id_to_token=tuple(kept), counts=tuple(counts[t] for t in kept))


def to_bow(tokens: Iterable[str], vocab: Vocabulary) -> dict[int, int]:
    """Bag-of-words counts over vocabulary ids; out-of-vocabulary tokens dropped."""
    bow: dict[int, int] = {}
    for token in tokens:
        idx = vocab.token_to_id.get(token)
        if idx is not None:
            bow[idx] = bow.get(idx, 0) + 1
    return bow
