import math

import numpy as np
import pytest
import torch

from topicmod.corpus import Vocabulary, build_vocabulary, to_bow, tokenize
from topicmod.etm import (
    ETMConfig,
    ETMModel,
    WordEmbeddings,
    compute_dte,
    evaluate_elbo,
    infer_dtd,
    load_checkpoint,
    load_embeddings,
    save_checkpoint,
    top_words,
    topic_term_dist,
    train_etm,
)

from helpers import corpus_of, dte_oracle, planted_topic_corpus


def small_vocab(n=8):
    tokens = tuple(f"w{i}" for i in range(n))
    return Vocabulary(id_to_token=tokens, counts=tuple(1 for _ in tokens))


def random_model(seed=0, V=8, D=4, K=3, hidden=(16,)):
    rng = np.random.default_rng(seed)
    rho = WordEmbeddings(matrix=rng.normal(0, 1, (V, D)).astype(np.float32))
    config = ETMConfig(hidden_sizes=hidden, seed=seed)
    return ETMModel(small_vocab(V), rho, K, config)


class TestLoadEmbeddings:
    def test_aligned_to_vocab_ids(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("b 1.0 2.0 3.0\na 4.0 5.0 6.0\n")
        vocab = Vocabulary(id_to_token=("a", "b"), counts=(1, 1))
        emb = load_embeddings(path, vocab)
        assert emb.matrix.shape == (2, 3)
        np.testing.assert_allclose(emb.matrix[0], [4.0, 5.0, 6.0])
        np.testing.assert_allclose(emb.matrix[1], [1.0, 2.0, 3.0])
        assert emb.missing == ()

    def test_header_row_skipped(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("2 3\na 1 2 3\nb 4 5 6\n")
        vocab = Vocabulary(id_to_token=("a", "b"), counts=(1, 1))
        assert load_embeddings(path, vocab).dim == 3

    def test_missing_token_random_init(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("a 1.0 2.0\nb 3.0 4.0\nc 0.0 1.0\n")
        vocab = Vocabulary(id_to_token=("a", "b", "nema"), counts=(1, 1, 1))
        emb = load_embeddings(path, vocab, seed=0)
        assert emb.missing == ("nema",)
        assert emb.matrix.shape == (3, 2)

    def test_dimension_mismatch_errors(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("a 1.0 2.0\nb 3.0\n")
        with pytest.raises(ValueError, match="dimension mismatch"):
            load_embeddings(path, Vocabulary(("a", "b"), (1, 1)))

    def test_low_coverage_warns(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("a 1.0 2.0\n")
        vocab = Vocabulary(id_to_token=("a", "x", "y"), counts=(1, 1, 1))
        with pytest.warns(UserWarning, match="cover"):
            load_embeddings(path, vocab)


class TestTopicTermDist:
    def test_zero_alpha_uniform(self):
        model = random_model()
        with torch.no_grad():
            model.alpha[1].zero_()
        beta = topic_term_dist(model, 1)
        np.testing.assert_allclose(beta, np.full(8, 1 / 8), atol=1e-7)

    def test_closed_form_concentration(self):
        V = D = 4
        rho = WordEmbeddings(matrix=np.eye(V, dtype=np.float32))
        model = ETMModel(small_vocab(V), rho, 2, ETMConfig(hidden_sizes=(8,)))
        c = 5.0
        with torch.no_grad():
            model.alpha[0] = torch.tensor([c, 0.0, 0.0, 0.0])
        beta = topic_term_dist(model, 0)
        expected0 = math.exp(c) / (math.exp(c) + V - 1)
        assert beta[0] == pytest.approx(expected0, rel=1e-6)
        assert beta[1] == pytest.approx(1 / (math.exp(c) + V - 1), rel=1e-6)

    def test_simplex(self):
        model = random_model(seed=5)
        for k in range(model.n_topics):
            beta = topic_term_dist(model, k)
            assert beta.min() >= 0
            assert abs(beta.sum() - 1.0) < 1e-6

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            topic_term_dist(random_model(), 3)


class TestInferDtd:
    def test_simplex_and_determinism(self):
        model = random_model(seed=1)
        bow = {0: 2, 3: 1}
        t1 = infer_dtd(model, bow, mode="mean")
        t2 = infer_dtd(model, bow, mode="mean")
        probs = np.asarray(t1)
        assert probs.min() >= 0
        assert abs(probs.sum() - 1.0) < 1e-6
        np.testing.assert_array_equal(probs, np.asarray(t2))
        assert not t1.degenerate

    def test_zeroed_inference_net_uniform(self):
        model = random_model(seed=2)
        with torch.no_grad():
            model.mu_head.weight.zero_()
            model.mu_head.bias.zero_()
        theta = infer_dtd(model, {1: 3}, mode="mean")
        np.testing.assert_allclose(np.asarray(theta),
                                   np.full(model.n_topics, 1 / model.n_topics),
                                   atol=1e-7)

    def test_empty_bow_uniform_degenerate(self):
        model = random_model()
        theta = infer_dtd(model, {}, mode="mean")
        assert theta.degenerate
        np.testing.assert_allclose(np.asarray(theta),
                                   np.full(model.n_topics, 1 / model.n_topics))

    def test_sample_mode_on_simplex(self):
        model = random_model(seed=3)
        theta = infer_dtd(model, {0: 1, 1: 1}, mode="sample", seed=11)
        probs = np.asarray(theta)
        assert probs.min() >= 0
        assert abs(probs.sum() - 1.0) < 1e-6


class TestComputeDte:
    def test_one_hot_returns_alpha_row(self):
        model = random_model(seed=4, K=4)
        theta = np.zeros(4)
        theta[2] = 1.0
        np.testing.assert_allclose(compute_dte(model, theta),
                                   model.alpha.detach().numpy()[2], atol=1e-7)

    def test_uniform_is_column_mean(self):
        model = random_model(seed=4, K=4)
        theta = np.full(4, 0.25)
        np.testing.assert_allclose(compute_dte(model, theta),
                                   model.alpha.detach().numpy().mean(axis=0),
                                   atol=1e-7)

    def test_matches_double_loop_oracle(self):
        model = random_model(seed=6, K=4, D=3)
        rng = np.random.default_rng(0)
        theta = rng.dirichlet(np.ones(4))
        expected = dte_oracle(model.alpha.detach().double().numpy(), theta)
        np.testing.assert_allclose(compute_dte(model, theta), expected,
                                   atol=1e-9)

    def test_linearity(self):
        model = random_model(seed=7, K=5)
        rng = np.random.default_rng(1)
        t1, t2 = rng.dirichlet(np.ones(5)), rng.dirichlet(np.ones(5))
        for a in (0.0, 0.3, 1.0):
            mix = a * t1 + (1 - a) * t2
            expected = a * compute_dte(model, t1) + (1 - a) * compute_dte(model, t2)
            np.testing.assert_allclose(compute_dte(model, mix), expected,
                                       atol=1e-9)


class TestGradientCheck:
    def test_elbo_gradients_match_finite_differences(self):
        model = random_model(seed=8, V=8, D=4, K=3, hidden=(6,)).double()
        x = torch.tensor([[1, 0, 2, 0, 0, 1, 0, 0],
                          [0, 3, 0, 1, 0, 0, 0, 1],
                          [2, 0, 0, 0, 1, 0, 1, 0]], dtype=torch.float64)
        gen = torch.Generator().manual_seed(0)
        eps = torch.randn(3, 3, generator=gen, dtype=torch.float64)

        def loss():
            return -model.elbo(x, eps=eps)

        model.zero_grad()
        loss().backward()
        h = 1e-6
        for name, param in model.named_parameters():
            if not param.requires_grad:
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
            rel = (analytic - numeric).norm().item() / denom
            assert rel < 1e-4, f"gradient mismatch for {name}: {rel}"


@pytest.fixture(scope="module")
def tiny_setup():
    corpus, _ = planted_topic_corpus(n_docs=200, n_topics=4, vocab_size=40,
                                     doc_len=20, seed=1)
    vocab = build_vocabulary(corpus, min_count=1, max_doc_frac=1.0)
    rng = np.random.default_rng(0)
    rho = WordEmbeddings(
        matrix=rng.normal(0, 0.5, (len(vocab), 8)).astype(np.float32))
    bows = [to_bow(tokenize(c.text), vocab) for c in corpus]
    return corpus, vocab, rho, bows


class TestTraining:
    def test_epochs_zero_returns_initialized(self, tiny_setup):
        _, vocab, rho, bows = tiny_setup
        config = ETMConfig(hidden_sizes=(32,), batch_size=64, seed=0)
        model = train_etm(bows[:150], rho, vocab, 4, epochs=0, config=config)
        assert model.history == []

    def test_training_improves_heldout_elbo(self, tiny_setup):
        _, vocab, rho, bows = tiny_setup
        config = ETMConfig(hidden_sizes=(32,), batch_size=64, seed=0)
        init = train_etm(bows[:150], rho, vocab, 4, epochs=0, config=config)
        trained = train_etm(bows[:150], rho, vocab, 4, epochs=50, config=config)
        assert evaluate_elbo(trained, bows[150:]) > evaluate_elbo(init, bows[150:])

    def test_elbo_history_non_decreasing_within_tolerance(self, tiny_setup):
        _, vocab, rho, bows = tiny_setup
        config = ETMConfig(hidden_sizes=(32,), batch_size=64, seed=0)
        model = train_etm(bows[:150], rho, vocab, 4, epochs=30, config=config)
        for prev, cur in zip(model.history, model.history[1:]):
            assert cur >= prev - 0.01 * abs(prev)

    def test_rho_frozen(self, tiny_setup):
        _, vocab, rho, bows = tiny_setup
        config = ETMConfig(hidden_sizes=(32,), batch_size=64, seed=0)
        model = train_etm(bows[:50], rho, vocab, 4, epochs=3, config=config)
        np.testing.assert_array_equal(model.rho.detach().numpy(), rho.matrix)

    def test_empty_bow_errors_with_index(self, tiny_setup):
        _, vocab, rho, _ = tiny_setup
        with pytest.raises(ValueError, match="index 1"):
            train_etm([{0: 1}, {}], rho, vocab, 4, epochs=1,
                      config=ETMConfig(hidden_sizes=(8,)))


class TestTopWords:
    def test_uniform_tie_break_by_id(self):
        model = random_model(seed=9)
        with torch.no_grad():
            model.alpha[0].zero_()
        assert top_words(model, 0, 3) == ["w0", "w1", "w2"]

    def test_concentrated_topic(self):
        V = D = 4
        rho = WordEmbeddings(matrix=np.eye(V, dtype=np.float32))
        vocab = Vocabulary(id_to_token=("spam", "x", "y", "z"),
                           counts=(1, 1, 1, 1))
        model = ETMModel(vocab, rho, 1, ETMConfig(hidden_sizes=(8,)))
        with torch.no_grad():
            model.alpha[0] = torch.tensor([10.0, 0.0, 0.0, 0.0])
        assert top_words(model, 0, 1) == ["spam"]


class TestCheckpoint:
    def test_roundtrip(self, tmp_path):
        model = random_model(seed=10, V=6, D=3, K=2, hidden=(8,))
        save_checkpoint(model, tmp_path / "ckpt")
        loaded = load_checkpoint(tmp_path / "ckpt")
        assert loaded.n_topics == model.n_topics
        assert loaded.vocab.id_to_token == model.vocab.id_to_token
        np.testing.assert_array_equal(topic_term_dist(loaded, 0),
                                      topic_term_dist(model, 0))
        bow = {0: 1, 2: 2}
        np.testing.assert_array_equal(np.asarray(infer_dtd(loaded, bow)),
                                      np.asarray(infer_dtd(model, bow)))
