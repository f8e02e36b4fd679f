"""Command-line interface.

Batch work (analysis, training, evaluation) runs the package directly;
queue and scoring commands are thin HTTP clients for a running service.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import click
import httpx
import numpy as np

from . import analysis, classifier, corpus, etm, evaluation
from .service.app import create_app_from_config, load_service_config


@click.group()
def main():
    """Topic-aware comment moderation toolkit."""


def _load(path: str, fmt: str) -> corpus.CommentCorpus:
    return corpus.load_corpus(path, format=fmt)


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "tsv"]))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--segment-size", default=1000, show_default=True)
@click.option("--bigram-min-count", default=50, show_default=True)
@click.option("--etm", "etm_dir", default=None, type=click.Path(exists=True),
              help="ETM checkpoint; enables the topic-overlap report.")
@click.option("--top-k", default=15, show_default=True)
def analyze(corpus_path, fmt, out_dir, segment_size, bigram_min_count,
            etm_dir, top_k):
    """Emit lexical stats, PMI bigrams, and (optionally) topic overlaps."""
    data = _load(corpus_path, fmt)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    slices = {
        "all": data,
        "non_blocked": data.subset(lambda c: c.label == 0),
        "blocked": data.subset(lambda c: c.label == 1),
        "blocked_spam": data.subset(lambda c: c.is_spam),
        "blocked_non_spam": data.subset(lambda c: c.label == 1 and not c.is_spam),
    }
    for section in data.sections():
        slices[f"section:{section}"] = data.subset(lambda c, s=section: c.section == s)

    stats = {name: analysis.lexical_stats(sl, segment_size).to_dict()
             for name, sl in slices.items() if len(sl)}
    (out / "stats.json").write_text(json.dumps(stats, indent=2))

    with (out / "bigrams.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slice", "bigram", "count", "pmi"])
        for name in ("blocked", "non_blocked"):
            for rb in analysis.pmi_bigrams(slices[name], bigram_min_count):
                writer.writerow([name, " ".join(rb.bigram), rb.count,
                                 f"{rb.pmi:.6f}"])

    if etm_dir:
        model = etm.load_checkpoint(etm_dir)
        overlaps = {}
        pairs = [("All", data)]
        pairs += [(s, data.subset(lambda c, s=s: c.section == s))
                  for s in data.sections()]
        for name, sl in pairs:
            blocked = sl.subset(lambda c: c.label == 1)
            non_blocked = sl.subset(lambda c: c.label == 0)
            if not len(blocked) or not len(non_blocked):
                continue
            dtds = {}
            for key, part in [("a", blocked), ("b", non_blocked)]:
                dtds[key] = [np.asarray(etm.infer_dtd(
                    model, corpus.to_bow(corpus.tokenize(c.text), model.vocab)))
                    for c in part]
            k = min(top_k, model.n_topics)
            report = analysis.topic_overlap(analysis.top_topics(dtds["a"], k),
                                            analysis.top_topics(dtds["b"], k),
                                            model)
            overlaps[name] = report.to_dict()
        (out / "overlap.json").write_text(json.dumps(overlaps, indent=2))
    click.echo(f"analysis written to {out}")


@main.command("train-etm")
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "tsv"]))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--embeddings", "emb_path", default=None, type=click.Path(exists=True),
              help="word2vec-format text embeddings; random init if omitted.")
@click.option("--topics", default=100, show_default=True)
@click.option("--epochs", default=500, show_default=True)
@click.option("--min-count", default=5, show_default=True)
@click.option("--max-doc-frac", default=0.7, show_default=True)
@click.option("--min-tokens", default=10, show_default=True,
              help="drop comments shorter than this before training.")
@click.option("--embed-dim", default=300, show_default=True)
@click.option("--batch-size", default=1000, show_default=True)
@click.option("--lr", default=0.005, show_default=True)
@click.option("--seed", default=0, show_default=True)
def train_etm_cmd(train_path, fmt, out_dir, emb_path, topics, epochs,
                  min_count, max_doc_frac, min_tokens, embed_dim,
                  batch_size, lr, seed):
    """Train the embedded topic model and write a checkpoint."""
    data = corpus.filter_min_length(_load(train_path, fmt), min_tokens)
    vocab = corpus.build_vocabulary(data, min_count=min_count,
                                    max_doc_frac=max_doc_frac)
    if emb_path:
        rho = etm.load_embeddings(emb_path, vocab, seed=seed)
    else:
        rng = np.random.default_rng(seed)
        rho = etm.WordEmbeddings(
            matrix=rng.normal(0, 0.1, (len(vocab), embed_dim)).astype(np.float32))
    bows = []
    for c in data:
        bow = corpus.to_bow(corpus.tokenize(c.text), vocab)
        if bow:
            bows.append(bow)
    config = etm.ETMConfig(batch_size=batch_size, lr=lr, seed=seed)
    model = etm.train_etm(bows, rho, vocab, topics, epochs, config)
    etm.save_checkpoint(model, out_dir)
    click.echo(f"ETM checkpoint written to {out_dir} "
               f"(final ELBO {model.history[-1]:.2f})" if model.history
               else f"ETM checkpoint written to {out_dir}")


@main.command("train-clf")
@click.option("--variant", required=True,
              type=click.Choice([v.lower() for v in classifier.VARIANTS]))
@click.option("--etm", "etm_dir", required=True, type=click.Path(exists=True))
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--valid", "valid_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "tsv"]))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--rnn-hidden", default=128, show_default=True)
@click.option("--mlp-hidden", default=64, show_default=True)
@click.option("--max-epochs", default=20, show_default=True)
@click.option("--batch-size", default=64, show_default=True)
@click.option("--lr", default=0.005, show_default=True)
@click.option("--max-seq-len", default=128, show_default=True)
@click.option("--seed", default=0, show_default=True)
def train_clf_cmd(variant, etm_dir, train_path, valid_path, fmt, out_dir,
                  rnn_hidden, mlp_hidden, max_epochs, batch_size, lr,
                  max_seq_len, seed):
    """Train one classifier variant against a trained ETM."""
    etm_model = etm.load_checkpoint(etm_dir)
    train_data = _load(train_path, fmt)
    valid_data = _load(valid_path, fmt)
    spec = classifier.VariantSpec.of(variant)
    config = classifier.ClassifierConfig(
        embed_dim=etm_model.embed_dim, rnn_hidden=rnn_hidden,
        mlp_hidden=mlp_hidden, max_epochs=max_epochs, batch_size=batch_size,
        lr=lr, max_seq_len=max_seq_len, seed=seed)
    rho = etm.WordEmbeddings(matrix=etm_model.rho.detach().numpy())
    model = classifier.build_model(spec, config, rho, etm_model)
    classifier.train_classifier(model, train_data, valid_data, etm_model)
    classifier.save_checkpoint(model, out_dir)
    best = model.history["best_epoch"]
    click.echo(f"{spec.variant} checkpoint written to {out_dir} (best epoch "
               f"{best}, valid loss {model.history['valid_loss'][best]:.4f})")


@main.command("eval")
@click.option("--model", "model_dir", required=True, type=click.Path(exists=True))
@click.option("--etm", "etm_dir", required=True, type=click.Path(exists=True))
@click.option("--test", "test_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "tsv"]))
@click.option("--out", "out_path", required=True, type=click.Path())
def eval_cmd(model_dir, etm_dir, test_path, fmt, out_path):
    """Evaluate a classifier: overall and per-section macro-F1."""
    model = classifier.load_checkpoint(model_dir)
    etm_model = etm.load_checkpoint(etm_dir)
    test_data = _load(test_path, fmt)
    report = evaluation.evaluate_by_section(model, test_data, etm_model)
    Path(out_path).write_text(report.to_json())
    click.echo(report.to_table())


@main.command()
@click.option("--model", "model_dir", required=True, type=click.Path(exists=True))
@click.option("--etm", "etm_dir", required=True, type=click.Path(exists=True))
@click.option("--test", "test_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "tsv"]))
@click.option("--out", "out_path", required=True, type=click.Path())
def sweep(model_dir, etm_dir, test_path, fmt, out_path):
    """Confidence sweep: macro-F1 at thresholds 0.50 to 1.00."""
    model = classifier.load_checkpoint(model_dir)
    etm_model = etm.load_checkpoint(etm_dir)
    test_data = _load(test_path, fmt)
    probabilities, gold = [], []
    for comment in test_data:
        scored = classifier.predict(model, comment, etm_model)
        probabilities.append(scored.probability)
        gold.append(comment.label)
    curve = evaluation.confidence_sweep(probabilities, gold,
                                        variant=model.spec.variant)
    with Path(out_path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "threshold", "macro_f1"])
        for row in curve.to_rows():
            writer.writerow(row)
    click.echo(f"sweep written to {out_path}")


@main.command()
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(config_path, host):
    """Run the moderation service (model/ETM dirs from config or env)."""
    import uvicorn

    config = load_service_config(config_path)
    app = create_app_from_config(config)
    uvicorn.run(app, host=host, port=config["port"])


# ---------------------------------------------------------------------------
# thin HTTP client commands


def _client(url: str) -> httpx.Client:
    return httpx.Client(base_url=url, timeout=30.0)


@main.command("score")
@click.option("--url", default="http://127.0.0.1:8000", show_default=True)
@click.option("--text", required=True)
@click.option("--section", default=None)
def score_cmd(url, text, section):
    """Score a single comment via the service."""
    with _client(url) as client:
        response = client.post("/score", json={"text": text, "section": section})
    response.raise_for_status()
    click.echo(json.dumps(response.json(), indent=2))


@main.command()
@click.option("--url", default="http://127.0.0.1:8000", show_default=True)
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="jsonl", type=click.Choice(["jsonl", "tsv"]))
def enqueue(url, corpus_path, fmt):
    """Enqueue a file of comments for review."""
    data = _load(corpus_path, fmt)
    payload = {"comments": [{
        "id": c.id, "text": c.text, "section": c.section,
        "subsection": c.subsection, "article_id": c.article_id,
        "timestamp": c.timestamp} for c in data]}
    with _client(url) as client:
        response = client.post("/queue", json=payload)
    response.raise_for_status()
    click.echo(json.dumps(response.json(), indent=2))


@main.command()
@click.option("--url", default="http://127.0.0.1:8000", show_default=True)
@click.option("--status", default=None)
@click.option("--section", default=None)
@click.option("--order", default="confidence_desc", show_default=True)
@click.option("--offset", default=0, show_default=True)
@click.option("--limit", default=20, show_default=True)
def queue(url, status, section, order, offset, limit):
    """List the review queue."""
    params = {"order": order, "offset": offset, "limit": limit}
    if status:
        params["status"] = status
    if section:
        params["section"] = section
    with _client(url) as client:
        response = client.get("/queue", params=params)
    response.raise_for_status()
    click.echo(json.dumps(response.json(), indent=2))


@main.command()
@click.option("--url", default="http://127.0.0.1:8000", show_default=True)
@click.option("--id", "comment_id", required=True)
@click.option("--decision", required=True, type=click.Choice(["approve", "block"]))
@click.option("--moderator", required=True)
def decide(url, comment_id, decision, moderator):
    """Record a moderator decision for a queued comment."""
    with _client(url) as client:
        response = client.post(f"/queue/{comment_id}/decision",
                               json={"decision": decision,
                                     "moderator_id": moderator})
    response.raise_for_status()
    click.echo(json.dumps(response.json(), indent=2))


@main.command()
@click.option("--url", default="http://127.0.0.1:8000", show_default=True)
def stats(url):
    """Moderator/model agreement statistics."""
    with _client(url) as client:
        response = client.get("/stats")
    response.raise_for_status()
    click.echo(json.dumps(response.json(), indent=2))


if __name__ == "__main__":
    main()
