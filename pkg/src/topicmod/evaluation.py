"""Macro-F1 scoring, per-section breakdowns, and confidence-threshold sweeps."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import CommentCorpus
from .classifier import ClassifierModel, predict
from .etm import ETMModel

SWEEP_THRESHOLDS = tuple(round(0.50 + 0.05 * i, 2) for i in range(11))


def _f1(tp: int, fp: int, fn: int) -> float:
    # no predicted or actual positives for a class -> F1 = 0
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


def macro_f1(predictions: Sequence[int], gold: Sequence[int]) -> float:
    """Unweighted mean of per-class F1 over {0, 1}, as a percentage."""
    if len(predictions) != len(gold):
        raise ValueError(f"length mismatch: {len(predictions)} predictions "
                         f"vs {len(gold)} gold labels")
    tp = fp = fn = tn = 0
    for p, g in zip(predictions, gold):
        if p == 1 and g == 1:
            tp += 1
        elif p == 1 and g == 0:
            fp += 1
        elif p == 0 and g == 1:
            fn += 1
        else:
            tn += 1
    f1_pos = _f1(tp, fp, fn)
    f1_neg = _f1(tn, fn, fp)
    return 100.0 * (f1_pos + f1_neg) / 2.0


@dataclass(frozen=True)
class EvaluationReport:
    overall_macro_f1: Optional[float]
    per_section: dict[str, Optional[float]]
    n_evaluated: int
    single_class_slices: tuple[str, ...] = ()
    variant: str = ""

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "overall_macro_f1": self.overall_macro_f1,
            "per_section": self.per_section,
            "n_evaluated": self.n_evaluated,
            "single_class_slices": list(self.single_class_slices),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def to_table(self) -> str:
        """Aligned text table: one row per slice plus the overall row."""
        rows = [("All", self.overall_macro_f1)]
        rows += sorted(self.per_section.items())
        width = max(len(name) for name, _ in rows)
        lines = [f"{'Section'.ljust(width)}  Macro-F1"]
        for name, value in rows:
            cell = f"{value:6.2f}" if value is not None else "  n/a"
            lines.append(f"{name.ljust(width)}  {cell}")
        return "\n".join(lines)


@dataclass(frozen=True)
class ConfidenceCurve:
    thresholds: tuple[float, ...]
    macro_f1_at: tuple[float, ...]
    variant: str = ""

    def to_rows(self) -> list[tuple[str, float, float]]:
        return [(self.variant, t, f)
                for t, f in zip(self.thresholds, self.macro_f1_at)]


def _slice_f1(pairs: list[tuple[int, int]]) -> Optional[float]:
    gold = [g for _, g in pairs]
    if len(set(gold)) < 2:
        return None
    return macro_f1([p for p, _ in pairs], gold)


def evaluate_by_section(model: ClassifierModel, test: CommentCorpus,
                        etm: ETMModel,
                        threshold: Optional[float] = None) -> EvaluationReport:
    """Macro-F1 overall and per section (and per subsection of each section).

    Slices whose gold labels contain a single class are reported as null
    and listed in ``single_class_slices``.
    """
    slices: dict[str, list[tuple[int, int]]] = {}
    all_pairs: list[tuple[int, int]] = []
    for comment in test:
        scored = predict(model, comment, etm, threshold=threshold)
        pair = (scored.predicted_label, comment.label)
        all_pairs.append(pair)
        if comment.section:
            slices.setdefault(comment.section, []).append(pair)
            if comment.subsection:
                key = f"{comment.section}/{comment.subsection}"
                slices.setdefault(key, []).append(pair)

    per_section = {name: _slice_f1(pairs) for name, pairs in slices.items()}
    degenerate = tuple(sorted(k for k, v in per_section.items() if v is None))
    return EvaluationReport(
        overall_macro_f1=_slice_f1(all_pairs),
        per_section=per_section,
        n_evaluated=len(all_pairs),
        single_class_slices=degenerate,
        variant=model.spec.variant,
    )


def confidence_sweep(probabilities: Sequence[float], gold: Sequence[int],
                     variant: str = "") -> ConfidenceCurve:
    """Macro-F1 as the positive threshold rises from 0.50 to 1.00 in 0.05 steps.

    At each threshold tau, a comment is predicted blocked iff p >= tau, so
    at tau = 1.0 only p = 1.0 counts as positive.
    """
    probs = np.asarray(probabilities, dtype=np.float64)
    if probs.size and (probs.min() < 0.0 or probs.max() > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    scores = []
    for tau in SWEEP_THRESHOLDS:
        preds = (probs >= tau).astype(int).tolist()
        scores.append(macro_f1(preds, list(gold)))
    return ConfidenceCurve(thresholds=SWEEP_THRESHOLDS,
                           macro_f1_at=tuple(scores), variant=variant)
