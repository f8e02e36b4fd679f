"""Ten moderation-classifier variants over comment text and topic features.

Baselines: TEXT (BiLSTM only), DTD / DTE / DTD_E (MLP over topic features).
Fusion: EF1-3 concatenate topic features with the word embeddings at every
token position before the BiLSTM; LF1-3 concatenate them with the BiLSTM's
final representation before the classification head.
"""

from __future__ import annotations

import copy
import json
import dataclasses
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import torch
from torch import nn

from .corpus import Comment, CommentCorpus, Vocabulary, to_bow, tokenize
from .etm import ETMModel, WordEmbeddings, compute_dte, infer_dtd

VARIANTS = ("TEXT", "DTD", "DTE", "DTD_E", "EF1", "EF2", "EF3", "LF1", "LF2", "LF3")


@dataclass(frozen=True)
class VariantSpec:
    variant: str
    uses_text: bool
    fusion: str  # none | early | late
    topic_features: frozenset[str]  # subset of {"dtd", "dte"}

    @classmethod
    def of(cls, variant: str) -> "VariantSpec":
        variant = variant.upper().replace("+", "_")
        table = {
            "TEXT": (True, "none", frozenset()),
            "DTD": (False, "none", frozenset({"dtd"})),
            "DTE": (False, "none", frozenset({"dte"})),
            "DTD_E": (False, "none", frozenset({"dtd", "dte"})),
            "EF1": (True, "early", frozenset({"dtd"})),
            "EF2": (True, "early", frozenset({"dte"})),
            "EF3": (True, "early", frozenset({"dtd", "dte"})),
            "LF1": (True, "late", frozenset({"dtd"})),
            "LF2": (True, "late", frozenset({"dte"})),
            "LF3": (True, "late", frozenset({"dtd", "dte"})),
        }
        if variant not in table:
            raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
        uses_text, fusion, feats = table[variant]
        return cls(variant=variant, uses_text=uses_text, fusion=fusion,
                   topic_features=feats)

    def to_dict(self) -> dict:
        return {"variant": self.variant, "uses_text": self.uses_text,
                "fusion": self.fusion,
                "topic_features": sorted(self.topic_features)}


@dataclass(frozen=True)
class ClassifierConfig:
    embed_dim: int = 300
    rnn_hidden: int = 128
    rnn_dropout: float = 0.5
    mlp_hidden: int = 64
    threshold: float = 0.5
    lr: float = 0.005
    max_epochs: int = 20
    batch_size: int = 64
    patience: int = 3
    max_seq_len: int = 128
    freeze_embeddings: bool = False
    pos_weight: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be in (0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierConfig":
        return cls(**d)


@dataclass(frozen=True)
class ScoredComment:
    comment_id: str
    probability: float
    predicted_label: int
    theta: np.ndarray
    top_topics: tuple[tuple[int, float, tuple[str, ...]], ...]
    all_oov: bool = False


class ClassifierModel(nn.Module):
    """One classifier variant; feature wiring is determined by its spec."""

    def __init__(self, spec: VariantSpec, config: ClassifierConfig,
                 vocab: Vocabulary, rho: WordEmbeddings,
                 n_topics: int, topic_embed_dim: int):
        super().__init__()
        if rho.vocab_size != len(vocab):
            raise ValueError("embedding rows must match vocabulary size")
        if config.embed_dim != rho.dim:
            config = dataclasses.replace(config, embed_dim=rho.dim)
        self.spec = spec
        self.config = config
        self.vocab = vocab
        self.n_topics = n_topics
        self.topic_embed_dim = topic_embed_dim
        self.pad_id = len(vocab)
        self.history: dict = {}

        torch.manual_seed(config.seed)
        feat_width = 0
        if "dtd" in spec.topic_features:
            feat_width += n_topics
        if "dte" in spec.topic_features:
            feat_width += topic_embed_dim

        if spec.uses_text:
            weights = torch.zeros(len(vocab) + 1, rho.dim)
            weights[:len(vocab)] = torch.from_numpy(rho.matrix.copy())
            self.embedding = nn.Embedding(len(vocab) + 1, rho.dim,
                                          padding_idx=self.pad_id)
            with torch.no_grad():
                self.embedding.weight.copy_(weights)
            if config.freeze_embeddings:
                self.embedding.weight.requires_grad = False
            self.lstm_in = rho.dim + (feat_width if spec.fusion == "early" else 0)
            self.lstm = nn.LSTM(self.lstm_in, config.rnn_hidden,
                                batch_first=True, bidirectional=True)
            self.input_dropout = nn.Dropout(config.rnn_dropout)
            self.head_in = 2 * config.rnn_hidden + (
                feat_width if spec.fusion == "late" else 0)
        else:
            self.lstm_in = 0
            self.head_in = feat_width
        self.head = nn.Sequential(
            nn.Linear(self.head_in, config.mlp_hidden),
            nn.ReLU(),
            nn.Linear(config.mlp_hidden, 1),
        )

    def _topic_feats(self, dtd: Optional[torch.Tensor],
                     dte: Optional[torch.Tensor]) -> Optional[torch.Tensor]:
        parts = []
        if "dtd" in self.spec.topic_features:
            if dtd is None:
                raise ValueError(f"{self.spec.variant} requires a topic distribution")
            parts.append(dtd)
        if "dte" in self.spec.topic_features:
            if dte is None:
                raise ValueError(f"{self.spec.variant} requires a topic embedding")
            parts.append(dte)
        if not parts:
            return None
        return torch.cat(parts, dim=1)

    def forward(self, token_ids: Optional[torch.Tensor],
                lengths: Optional[torch.Tensor],
                dtd: Optional[torch.Tensor] = None,
                dte: Optional[torch.Tensor] = None) -> torch.Tensor:
        """Classification logits for a padded batch."""
        feats = self._topic_feats(dtd, dte)
        if not self.spec.uses_text:
            return self.head(feats).squeeze(-1)

        embedded = self.embedding(token_ids)
        if self.spec.fusion == "early":
            tiled = feats.unsqueeze(1).expand(-1, embedded.shape[1], -1)
            embedded = torch.cat([embedded, tiled], dim=2)
        embedded = self.input_dropout(embedded)
        packed = nn.utils.rnn.pack_padded_sequence(
            embedded, lengths.cpu(), batch_first=True, enforce_sorted=False)
        _, (h_n, _) = self.lstm(packed)
        # final forward and backward hidden states, concatenated
        encoded = torch.cat([h_n[0], h_n[1]], dim=1)
        if self.spec.fusion == "late":
            encoded = torch.cat([encoded, feats], dim=1)
        return self.head(encoded).squeeze(-1)

    def encode_tokens(self, tokens: Sequence[str]) -> tuple[list[int], bool]:
        """Token ids (OOV dropped, truncated); empty input falls back to one pad."""
        ids = [self.vocab.token_to_id[t] for t in tokens if t in self.vocab]
        ids = ids[:self.config.max_seq_len]
        if not ids:
            return [self.pad_id], True
        return ids, False


def build_model(spec: VariantSpec, config: ClassifierConfig,
                rho: WordEmbeddings, etm: ETMModel) -> ClassifierModel:
    """Assemble a classifier wired for the given variant against an ETM."""
    return ClassifierModel(spec, config, etm.vocab, rho,
                           n_topics=etm.n_topics, topic_embed_dim=etm.embed_dim)


def _batch_tensors(model: ClassifierModel, token_lists: Sequence[Sequence[int]],
                   thetas: Optional[np.ndarray], dtes: Optional[np.ndarray]):
    dtd = dte = None
    if "dtd" in model.spec.topic_features:
        if thetas is None:
            raise ValueError(f"{model.spec.variant} requires a topic distribution")
        dtd = torch.as_tensor(np.asarray(thetas), dtype=torch.float32)
    if "dte" in model.spec.topic_features:
        if dtes is None:
            raise ValueError(f"{model.spec.variant} requires a topic embedding")
        dte = torch.as_tensor(np.asarray(dtes), dtype=torch.float32)
    if not model.spec.uses_text:
        return None, None, dtd, dte
    max_len = max(len(ids) for ids in token_lists)
    padded = torch.full((len(token_lists), max_len), model.pad_id, dtype=torch.long)
    lengths = torch.zeros(len(token_lists), dtype=torch.long)
    for i, ids in enumerate(token_lists):
        padded[i, :len(ids)] = torch.as_tensor(ids)
        lengths[i] = len(ids)
    return padded, lengths, dtd, dte


def score(model: ClassifierModel, tokens: Sequence[str],
          theta=None, dte=None) -> float:
    """Probability of the blocked class; deterministic (evaluation mode)."""
    model.eval()
    ids, _ = model.encode_tokens(tokens)
    token_ids, lengths, dtd_t, dte_t = _batch_tensors(
        model,
        [ids],
        None if theta is None else np.asarray(theta, dtype=np.float32)[None, :],
        None if dte is None else np.asarray(dte, dtype=np.float32)[None, :],
    )
    with torch.no_grad():
        logit = model(token_ids, lengths, dtd_t, dte_t)
    return torch.sigmoid(logit)[0].item()


def _features_for(model: ClassifierModel, comments: Sequence[Comment],
                  etm: ETMModel):
    """Precompute token ids and topic features (posterior mean) per comment."""
    token_lists, thetas, dtes, labels = [], [], [], []
    for comment in comments:
        tokens = tokenize(comment.text)
        ids, _ = model.encode_tokens(tokens)
        token_lists.append(ids)
        theta = infer_dtd(etm, to_bow(tokens, etm.vocab), mode="mean")
        thetas.append(np.asarray(theta, dtype=np.float32))
        dtes.append(compute_dte(etm, theta).astype(np.float32))
        labels.append(float(comment.label))
    return token_lists, np.stack(thetas), np.stack(dtes), np.asarray(labels)


def _epoch_loss(model: ClassifierModel, data, loss_fn, batch_size: int,
                optimizer=None, generator=None) -> float:
    token_lists, thetas, dtes, labels = data
    n = len(labels)
    if optimizer is not None and generator is not None:
        order = torch.randperm(n, generator=generator).tolist()
    else:
        order = list(range(n))
    total = 0.0
    for start in range(0, n, batch_size):
        idx = order[start:start + batch_size]
        token_ids, lengths, dtd, dte = _batch_tensors(
            model, [token_lists[i] for i in idx], thetas[idx], dtes[idx])
        target = torch.as_tensor(labels[idx], dtype=torch.float32)
        if optimizer is not None:
            optimizer.zero_grad()
            loss = loss_fn(model(token_ids, lengths, dtd, dte), target)
            loss.backward()
            optimizer.step()
        else:
            with torch.no_grad():
                loss = loss_fn(model(token_ids, lengths, dtd, dte), target)
        total += loss.item() * len(idx)
    return total / n


def train_classifier(model: ClassifierModel, train: CommentCorpus,
                     valid: CommentCorpus, etm: ETMModel) -> ClassifierModel:
    """Minimize binary cross-entropy with early stopping on validation loss.

    Returns the model restored to the best-validation-loss epoch; per-epoch
    losses land in ``model.history``.
    """
    labels = {c.label for c in train}
    if labels != {0, 1}:
        raise ValueError("training set must contain both classes")
    config = model.config
    torch.manual_seed(config.seed)
    generator = torch.Generator().manual_seed(config.seed)

    train_data = _features_for(model, list(train), etm)
    valid_data = _features_for(model, list(valid), etm)
    pos_weight = None
    if config.pos_weight is not None:
        pos_weight = torch.tensor(config.pos_weight)
    loss_fn = nn.BCEWithLogitsLoss(pos_weight=pos_weight)
    optimizer = torch.optim.Adam(
        (p for p in model.parameters() if p.requires_grad), lr=config.lr)

    history = {"train_loss": [], "valid_loss": [], "best_epoch": 0}
    best_loss = float("inf")
    best_state = copy.deepcopy(model.state_dict())
    epochs_since_best = 0
    for epoch in range(config.max_epochs):
        model.train()
        train_loss = _epoch_loss(model, train_data, loss_fn, config.batch_size,
                                 optimizer=optimizer, generator=generator)
        model.eval()
        valid_loss = _epoch_loss(model, valid_data, loss_fn, config.batch_size)
        history["train_loss"].append(train_loss)
        history["valid_loss"].append(valid_loss)
        if valid_loss < best_loss:
            best_loss = valid_loss
            best_state = copy.deepcopy(model.state_dict())
            history["best_epoch"] = epoch
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best > config.patience:
                break
    model.load_state_dict(best_state)
    model.eval()
    model.history = history
    return model


def predict(model: ClassifierModel, comment: Comment, etm: ETMModel,
            threshold: Optional[float] = None,
            topic_weight_floor: float = 0.10) -> ScoredComment:
    """Score one comment end to end and attach its topic explanation.

    Top topics are those with posterior weight >= ``topic_weight_floor``,
    each carrying its ten highest-probability words.
    """
    if threshold is None:
        threshold = model.config.threshold
    tokens = tokenize(comment.text)
    bow = to_bow(tokens, etm.vocab)
    theta = infer_dtd(etm, bow, mode="mean")
    dte = compute_dte(etm, theta)
    probability = score(model, tokens, theta=theta, dte=dte)
    probs = np.asarray(theta)
    top = [(int(k), float(probs[k]), tuple(etm.top_words(int(k), 10)))
           for k in np.argsort(-probs, kind="stable")
           if probs[k] >= topic_weight_floor]
    return ScoredComment(
        comment_id=comment.id,
        probability=probability,
        predicted_label=int(probability >= threshold),
        theta=probs,
        top_topics=tuple(top),
        all_oov=theta.degenerate,
    )


def save_checkpoint(model: ClassifierModel, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "spec.json").write_text(json.dumps(model.spec.to_dict(), indent=2))
    (out / "config.json").write_text(json.dumps(model.config.to_dict(), indent=2))
    meta = {"n_topics": model.n_topics, "topic_embed_dim": model.topic_embed_dim,
            "vocab_size": len(model.vocab), "embed_dim": model.config.embed_dim}
    (out / "meta.json").write_text(json.dumps(meta, indent=2))
    model.vocab.save(out / "vocab.txt")
    weights = out / "weights"
    weights.mkdir(exist_ok=True)
    for name, tensor in model.state_dict().items():
        np.save(weights / f"{name}.npy", tensor.numpy().astype("<f4", copy=False))


def load_checkpoint(ckpt_dir: str | Path) -> ClassifierModel:
    ckpt = Path(ckpt_dir)
    spec_d = json.loads((ckpt / "spec.json").read_text())
    spec = VariantSpec(variant=spec_d["variant"], uses_text=spec_d["uses_text"],
                       fusion=spec_d["fusion"],
                       topic_features=frozenset(spec_d["topic_features"]))
    config = ClassifierConfig.from_dict(json.loads((ckpt / "config.json").read_text()))
    meta = json.loads((ckpt / "meta.json").read_text())
    vocab = Vocabulary.load(ckpt / "vocab.txt")
    rho = WordEmbeddings(matrix=np.zeros((meta["vocab_size"], meta["embed_dim"]),
                                         dtype=np.float32))
    model = ClassifierModel(spec, config, vocab, rho,
                            n_topics=meta["n_topics"],
                            topic_embed_dim=meta["topic_embed_dim"])
    state = {name: torch.from_numpy(
        np.load(ckpt / "weights" / f"{name}.npy").astype(np.float32))
        for name in model.state_dict()}
    model.load_state_dict(state)
    model.eval()
    return model
