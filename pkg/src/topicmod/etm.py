"""Embedded topic model: topics as points in word-embedding space, with an
amortized logistic-normal variational posterior over document-topic mixtures."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import torch
from torch import nn

from .corpus import Vocabulary

EPS = 1e-12


@dataclass(frozen=True)
class WordEmbeddings:
    """V x D embedding matrix aligned to vocabulary ids."""

    matrix: np.ndarray
    missing: tuple[str, ...] = ()

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def vocab_size(self) -> int:
        return self.matrix.shape[0]


def load_embeddings(path: str | Path, vocab: Vocabulary,
                    seed: int = 0) -> WordEmbeddings:
    """Read word2vec-style text embeddings and align rows to vocabulary ids.

    Tokens absent from the file get zero-mean Gaussian rows with the file's
    per-dimension standard deviation.
    """
    vectors: dict[str, np.ndarray] = {}
    dim: Optional[int] = None
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                # optional "count dim" header
                continue
            token, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise ValueError(f"embedding dimension mismatch at line {lineno}: "
                                 f"expected {dim}, got {len(values)}")
            if token in vocab:
                vectors[token] = np.asarray(values, dtype=np.float32)
    if dim is None:
        raise ValueError("embedding file contains no vectors")

    coverage = len(vectors) / len(vocab) if len(vocab) else 0.0
    if coverage < 0.5:
        warnings.warn(f"embeddings cover only {coverage:.1%} of the vocabulary")

    if vectors:
        stacked = np.stack(list(vectors.values()))
        per_dim_std = stacked.std(axis=0)
    else:
        per_dim_std = np.ones(dim, dtype=np.float32)

    rng = np.random.default_rng(seed)
    matrix = np.empty((len(vocab), dim), dtype=np.float32)
    missing = []
    for idx, token in enumerate(vocab.id_to_token):
        if token in vectors:
            matrix[idx] = vectors[token]
        else:
            matrix[idx] = rng.normal(0.0, per_dim_std, size=dim)
            missing.append(token)
    return WordEmbeddings(matrix=matrix, missing=tuple(missing))


@dataclass(frozen=True)
class ETMConfig:
    """Training hyperparameters; defaults follow common ETM practice."""

    hidden_sizes: tuple[int, ...] = (800, 800)
    dropout: float = 0.0
    batch_size: int = 1000
    lr: float = 0.005
    weight_decay: float = 1.2e-6
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ETMConfig":
        d = dict(d)
        d["hidden_sizes"] = tuple(d.get("hidden_sizes", (800, 800)))
        return cls(**d)


@dataclass(frozen=True)
class TopicDistribution:
    """Point on the K-simplex; ``degenerate`` marks all-OOV fallbacks."""

    probs: np.ndarray
    degenerate: bool = False

    def __array__(self, dtype=None):
        return np.asarray(self.probs, dtype=dtype)

    def __len__(self) -> int:
        return len(self.probs)


class ETMModel(nn.Module):
    """Topic embeddings alpha (trainable) over frozen word embeddings rho,
    plus an inference network mapping normalized bags-of-words to the
    logistic-normal posterior parameters (mu, log sigma^2)."""

    def __init__(self, vocab: Vocabulary, rho: WordEmbeddings, n_topics: int,
                 config: ETMConfig = ETMConfig()):
        super().__init__()
        if rho.vocab_size != len(vocab):
            raise ValueError(f"embedding rows ({rho.vocab_size}) must match "
                             f"vocabulary size ({len(vocab)})")
        self.vocab = vocab
        self.config = config
        self.n_topics = n_topics
        self.embed_dim = rho.dim
        self.history: list[float] = []

        self.rho = nn.Parameter(torch.from_numpy(rho.matrix.copy()),
                                requires_grad=False)
        gen = torch.Generator().manual_seed(config.seed)
        self.alpha = nn.Parameter(
            torch.randn(n_topics, rho.dim, generator=gen) * 0.02)

        layers: list[nn.Module] = []
        width = len(vocab)
        for hidden in config.hidden_sizes:
            layers.append(nn.Linear(width, hidden))
            layers.append(nn.Softplus())
            if config.dropout > 0:
                layers.append(nn.Dropout(config.dropout))
            width = hidden
        self.encoder = nn.Sequential(*layers)
        self.mu_head = nn.Linear(width, n_topics)
        self.logvar_head = nn.Linear(width, n_topics)
        with torch.no_grad():
            for module in [*self.encoder, self.mu_head, self.logvar_head]:
                if isinstance(module, nn.Linear):
                    module.weight.normal_(0.0, 0.02, generator=gen)
                    module.bias.zero_()

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def beta(self) -> torch.Tensor:
        """K x V topic-term distributions: softmax over words of rho . alpha_k."""
        return torch.softmax(self.alpha @ self.rho.t(), dim=1)

    def encode(self, x_counts: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        sums = x_counts.sum(dim=1, keepdim=True).clamp_min(1.0)
        hidden = self.encoder(x_counts / sums)
        return self.mu_head(hidden), self.logvar_head(hidden)

    def elbo(self, x_counts: torch.Tensor,
             eps: Optional[torch.Tensor] = None) -> torch.Tensor:
        """Per-document mean ELBO; ``eps`` fixes the reparameterization noise."""
        mu, logvar = self.encode(x_counts)
        if eps is None:
            eps = torch.randn_like(mu)
        delta = mu + torch.exp(0.5 * logvar) * eps
        theta = torch.softmax(delta, dim=1)
        recon = (x_counts * torch.log(theta @ self.beta() + EPS)).sum(dim=1)
        kl = 0.5 * (torch.exp(logvar) + mu ** 2 - 1.0 - logvar).sum(dim=1)
        return (recon - kl).mean()

    def topic_term_dist(self, k: int) -> np.ndarray:
        return topic_term_dist(self, k)

    def top_words(self, k: int, n: int = 10) -> list[str]:
        return top_words(self, k, n)


def _bows_to_matrix(bows: Sequence[dict[int, int]], vocab_size: int) -> torch.Tensor:
    x = torch.zeros(len(bows), vocab_size)
    for i, bow in enumerate(bows):
        if not bow:
            raise ValueError(f"empty bag-of-words at document index {i}")
        for idx, count in bow.items():
            x[i, idx] = float(count)
    return x


def train_etm(bows: Sequence[dict[int, int]], rho: WordEmbeddings, vocab: Vocabulary,
              n_topics: int, epochs: int,
              config: ETMConfig = ETMConfig()) -> ETMModel:
    """Train topic embeddings and the inference network by maximizing the ELBO.

    Word embeddings stay frozen. The returned model records the per-epoch
    mean training ELBO in ``model.history``.
    """
    if not bows:
        raise ValueError("empty training set")
    torch.manual_seed(config.seed)
    model = ETMModel(vocab, rho, n_topics, config)
    x = _bows_to_matrix(bows, len(vocab))
    params = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.Adam(params, lr=config.lr,
                                 weight_decay=config.weight_decay)
    n = x.shape[0]
    for _ in range(epochs):
        perm = torch.randperm(n)
        epoch_elbo = 0.0
        model.train()
        for start in range(0, n, config.batch_size):
            batch = x[perm[start:start + config.batch_size]]
            optimizer.zero_grad()
            elbo = model.elbo(batch)
            (-elbo).backward()
            optimizer.step()
            epoch_elbo += elbo.item() * batch.shape[0]
        model.history.append(epoch_elbo / n)
    model.eval()
    return model


def evaluate_elbo(model: ETMModel, bows: Sequence[dict[int, int]],
                  seed: int = 0) -> float:
    """Per-document mean ELBO on held-out bags-of-words (seeded noise)."""
    x = _bows_to_matrix(bows, model.vocab_size)
    gen = torch.Generator().manual_seed(seed)
    eps = torch.randn(x.shape[0], model.n_topics, generator=gen)
    model.eval()
    with torch.no_grad():
        return model.elbo(x, eps=eps).item()


def topic_term_dist(model: ETMModel, k: int) -> np.ndarray:
    """Length-V probability vector beta_k for topic k."""
    if not 0 <= k < model.n_topics:
        raise IndexError(f"topic id {k} out of range [0, {model.n_topics})")
    with torch.no_grad():
        return model.beta()[k].double().numpy()


def infer_dtd(model: ETMModel, bow: dict[int, int],
              mode: str = "mean", seed: Optional[int] = None) -> TopicDistribution:
    """Posterior document-topic distribution for one bag-of-words.

    mode="mean" is deterministic (softmax of the posterior mean); "sample"
    draws reparameterized noise.  An empty bag-of-words (all-OOV document)
    yields a uniform distribution flagged as degenerate.
    """
    if mode not in ("mean", "sample"):
        raise ValueError(f"unknown mode {mode!r}")
    if not bow:
        uniform = np.full(model.n_topics, 1.0 / model.n_topics)
        return TopicDistribution(probs=uniform, degenerate=True)
    x = _bows_to_matrix([bow], model.vocab_size)
    model.eval()
    with torch.no_grad():
        mu, logvar = model.encode(x)
        if mode == "mean":
            delta = mu
        else:
            gen = torch.Generator()
            if seed is not None:
                gen.manual_seed(seed)
            delta = mu + torch.exp(0.5 * logvar) * torch.randn(
                mu.shape, generator=gen)
        theta = torch.softmax(delta, dim=1)[0].double().numpy()
    return TopicDistribution(probs=theta)


def compute_dte(model: ETMModel, theta) -> np.ndarray:
    """Topic-mixture embedding: theta-weighted sum of topic embedding rows."""
    theta = np.asarray(theta, dtype=np.float64)
    alpha = model.alpha.detach().double().numpy()
    return theta @ alpha


def top_words(model: ETMModel, k: int, n: int = 10) -> list[str]:
    """The n highest-probability words of topic k, ties broken by token id."""
    beta_k = topic_term_dist(model, k)
    if n > len(beta_k):
        raise ValueError(f"n={n} exceeds vocabulary size {len(beta_k)}")
    order = np.argsort(-beta_k, kind="stable")
    return [model.vocab.id_to_token[i] for i in order[:n]]


def save_checkpoint(model: ETMModel, out_dir: str | Path) -> None:
    """Write meta.json, vocab.txt, and one little-endian float32 .npy per array."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "n_topics": model.n_topics,
        "embed_dim": model.embed_dim,
        "vocab_size": model.vocab_size,
        "config": model.config.to_dict(),
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2))
    model.vocab.save(out / "vocab.txt")
    weights = out / "weights"
    weights.mkdir(exist_ok=True)
    for name, tensor in model.state_dict().items():
        np.save(weights / f"{name}.npy",
                tensor.numpy().astype("<f4", copy=False))


def load_checkpoint(ckpt_dir: str | Path) -> ETMModel:
    ckpt = Path(ckpt_dir)
    meta = json.loads((ckpt / "meta.json").read_text())
    vocab = Vocabulary.load(ckpt / "vocab.txt")
    config = ETMConfig.from_dict(meta["config"])
    rho = np.load(ckpt / "weights" / "rho.npy").astype(np.float32)
    model = ETMModel(vocab, WordEmbeddings(matrix=rho), meta["n_topics"], config)
    state = {}
    for name in model.state_dict():
        state[name] = torch.from_numpy(
            np.load(ckpt / "weights" / f"{name}.npy").astype(np.float32))
    model.load_state_dict(state)
    model.eval()
    return model
