#!/usr/bin/env python3
"""Full-data reproduction run (hours of CPU/GPU time; not part of CI).

Given the public moderation corpus splits and 300-dimensional pretrained
word2vec embeddings, this trains the 100-topic embedded topic model for 500
epochs, then trains all ten classifier variants (four baselines plus six
fusion architectures) with the reference hyperparameters, and writes a
per-section macro-F1 report over all variants.

Expected direction on the full data: the late-fusion model using the topic
distribution (LF1) beats the text-only model by several macro-F1 points.

Example:
    python scripts/reproduce_full.py \
        --train train.jsonl --valid valid.jsonl --test test.jsonl \
        --embeddings hr-word2vec-300d.txt --out runs/full
"""

import argparse
import json
from pathlib import Path

from topicmod import classifier, corpus, etm, evaluation


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--train", required=True, help="training comments (jsonl)")
    parser.add_argument("--valid", required=True, help="validation comments (jsonl)")
    parser.add_argument("--test", required=True, help="test comments (jsonl)")
    parser.add_argument("--embeddings", required=True,
                        help="pretrained 300D word2vec embeddings, text format")
    parser.add_argument("--out", required=True, help="output run directory")
    parser.add_argument("--topics", type=int, default=100)
    parser.add_argument("--etm-epochs", type=int, default=500)
    parser.add_argument("--topic-train-size", type=int, default=80_000)
    parser.add_argument("--min-tokens", type=int, default=10,
                        help="minimum comment length for topic-model training")
    parser.add_argument("--seed", type=int, default=0)
    return parser.parse_args()


def main():
    args = parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    train_full = corpus.load_corpus(args.train)
    valid = corpus.load_corpus(args.valid)
    test = corpus.load_corpus(args.test)

    # topic-model training set: length-filtered, class-balanced sample
    topic_pool = corpus.filter_min_length(train_full, args.min_tokens)
    n_topic = min(args.topic_train_size, 2 * min(
        sum(c.label for c in topic_pool),
        sum(1 - c.label for c in topic_pool)))
    topic_train = corpus.sample_topic_train(topic_pool, n_topic, seed=args.seed)

    vocab = corpus.build_vocabulary(topic_train)
    rho = etm.load_embeddings(args.embeddings, vocab, seed=args.seed)
    bows = [b for b in (corpus.to_bow(corpus.tokenize(c.text), vocab)
                        for c in topic_train) if b]
    print(f"training ETM: K={args.topics}, V={len(vocab)}, "
          f"{len(bows)} documents, {args.etm_epochs} epochs")
    etm_model = etm.train_etm(bows, rho, vocab, args.topics, args.etm_epochs,
                              etm.ETMConfig(seed=args.seed))
    etm.save_checkpoint(etm_model, out / "etm")

    report = {}
    for variant in classifier.VARIANTS:
        print(f"training {variant}")
        spec = classifier.VariantSpec.of(variant)
        config = classifier.ClassifierConfig(embed_dim=rho.dim, seed=args.seed)
        model = classifier.build_model(spec, config, rho, etm_model)
        classifier.train_classifier(model, train_full, valid, etm_model)
        classifier.save_checkpoint(model, out / f"clf_{variant.lower()}")
        section_report = evaluation.evaluate_by_section(model, test, etm_model)
        report[variant] = section_report.to_dict()
        print(section_report.to_table())

    (out / "report.json").write_text(json.dumps(report, indent=2))

    # Table-4-shaped summary: sections as rows, variants as columns
    sections = sorted({s for r in report.values() for s in r["per_section"]})
    lines = ["Section".ljust(24) + "".join(v.rjust(8) for v in classifier.VARIANTS)]
    rows = [("All", lambda r: r["overall_macro_f1"])]
    rows += [(s, lambda r, s=s: r["per_section"].get(s)) for s in sections]
    for name, getter in rows:
        cells = []
        for variant in classifier.VARIANTS:
            value = getter(report[variant])
            cells.append(f"{value:8.2f}" if value is not None else "     n/a")
        lines.append(name.ljust(24) + "".join(cells))
    table = "\n".join(lines)
    (out / "report_table.txt").write_text(table + "\n")
    print(table)


if __name__ == "__main__":
    main()
