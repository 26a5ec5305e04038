"""Metric computation and the normalization map used for scheduling.

Raw metrics keep their natural scale (accuracy/F1 in [0, 1], the two
correlation-style metrics in [-1, 1]). ``normalize`` maps any of them into
[0, 1] so the dynamic scheduler can compare headroom across tasks, and
reported scores are raw metric x 100.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import stats as scipy_stats

from .errors import ValidationError
from .tasks import MetricKind


def accuracy(predictions: Sequence, golds: Sequence) -> float:
    _check_lengths(predictions, golds)
    hits = sum(1 for p, g in zip(predictions, golds) if p == g)
    return hits / len(golds)


def f1_binary(predictions: Sequence, golds: Sequence, positive_label) -> float:
    """F1 of the positive class; 0.0 when there are no positives on either side."""
    _check_lengths(predictions, golds)
    tp = sum(1 for p, g in zip(predictions, golds) if p == positive_label and g == positive_label)
    fp = sum(1 for p, g in zip(predictions, golds) if p == positive_label and g != positive_label)
    fn = sum(1 for p, g in zip(predictions, golds) if p != positive_label and g == positive_label)
    if 2 * tp + fp + fn == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


def matthews_corr(predictions: Sequence, golds: Sequence) -> float:
    """Binary Matthews correlation; 0.0 when any confusion-matrix margin is empty."""
    _check_lengths(predictions, golds)
    labels = sorted(set(golds) | set(predictions))
    if len(labels) > 2:
        raise ValidationError("matthews_corr expects binary labels")
    if len(labels) == 1:
        return 0.0
    neg, pos = labels
    tp = sum(1 for p, g in zip(predictions, golds) if p == pos and g == pos)
    tn = sum(1 for p, g in zip(predictions, golds) if p == neg and g == neg)
    fp = sum(1 for p, g in zip(predictions, golds) if p == pos and g == neg)
    fn = sum(1 for p, g in zip(predictions, golds) if p == neg and g == pos)
    denom = math.sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn))
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / denom


def pearson_spearman_avg(predictions: Sequence[float], golds: Sequence[float]) -> float:
    """Mean of Pearson r and Spearman rho; degenerate (constant) inputs score 0."""
    _check_lengths(predictions, golds)
    preds = np.asarray(predictions, dtype=float)
    gold = np.asarray(golds, dtype=float)
    if len(preds) < 2 or np.all(preds == preds[0]) or np.all(gold == gold[0]):
        return 0.0
    pearson = scipy_stats.pearsonr(preds, gold).statistic
    spearman = scipy_stats.spearmanr(preds, gold).statistic
    return float((pearson + spearman) / 2.0)


def compute_metric(kind: MetricKind, predictions: Sequence, golds: Sequence,
                   positive_label=None) -> float:
    if kind is MetricKind.ACCURACY:
        return accuracy(predictions, golds)
    if kind is MetricKind.F1:
        if positive_label is None:
            raise ValidationError("F1 needs a positive_label")
        return f1_binary(predictions, golds, positive_label)
    if kind is MetricKind.MATTHEWS_CORR:
        return matthews_corr(predictions, golds)
    if kind is MetricKind.PEARSON_SPEARMAN_AVG:
        return pearson_spearman_avg(predictions, golds)
    raise ValidationError(f"unknown metric kind {kind!r}")


def normalize(kind: MetricKind, value: float) -> float:
    """Map a raw metric into [0, 1]. Correlation-style metrics use (x + 1) / 2."""
    if kind in (MetricKind.ACCURACY, MetricKind.F1):
        out = value
    else:
        out = (value + 1.0) / 2.0
    if not -1e-9 <= out <= 1.0 + 1e-9:
        raise ValidationError(f"metric value {value!r} out of range for {kind.value}")
    return min(max(out, 0.0), 1.0)


def reported_score(raw_metric: float) -> float:
    """Raw metric on the 0-100 presentation scale."""
    return 100.0 * raw_metric


def _check_lengths(predictions: Sequence, golds: Sequence) -> None:
    if len(predictions) != len(golds):
        raise ValidationError(
            f"prediction/gold length mismatch: {len(predictions)} vs {len(golds)}")
    if len(golds) == 0:
        raise ValidationError("cannot score an empty split")
