"""Confusion-matrix accumulation and derived classification metrics.

The positive class is DC and the negative class is MC throughout. Metrics
with a zero denominator return None rather than NaN so report aggregation
stays total; mcc alone degrades to 0.0 when only one of its four marginal
sums vanishes, and returns None only for an empty matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .centromere import DC, MC
from .errors import LengthMismatch


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            tp=self.tp + other.tp,
            tn=self.tn + other.tn,
            fp=self.fp + other.fp,
            fn=self.fn + other.fn,
        )


def accumulate(calls, truths) -> ConfusionMatrix:
    """Count DC-positive outcomes for paired predicted and true labels."""
    calls, truths = list(calls), list(truths)
    if len(calls) != len(truths):
        raise LengthMismatch(f"{len(calls)} calls vs {len(truths)} truths")
    tp = tn = fp = fn = 0
    for call, truth in zip(calls, truths):
        if truth == DC:
            if call == DC:
                tp += 1
            else:
                fn += 1
        elif truth == MC:
            if call == DC:
                fp += 1
            else:
                tn += 1
        else:
            raise ValueError(f"truth label must be {MC} or {DC}, got {truth!r}")
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)


def _ratio(num: int, den: int) -> float | None:
    return None if den == 0 else num / den


def accuracy(cm: ConfusionMatrix) -> float | None:
    return _ratio(cm.tp + cm.tn, cm.total)


def precision(cm: ConfusionMatrix) -> float | None:
    return _ratio(cm.tp, cm.tp + cm.fp)


def recall(cm: ConfusionMatrix) -> float | None:
    return _ratio(cm.tp, cm.tp + cm.fn)


def specificity(cm: ConfusionMatrix) -> float | None:
    return _ratio(cm.tn, cm.tn + cm.fp)


def mcc(cm: ConfusionMatrix) -> float | None:
    if cm.total == 0:
        return None
    sums = (cm.tp + cm.fp, cm.tp + cm.fn, cm.tn + cm.fp, cm.tn + cm.fn)
    if any(s == 0 for s in sums):
        return 0.0
    den = math.prod(math.sqrt(s) for s in sums)
    return (cm.tp * cm.tn - cm.fp * cm.fn) / den


def all_metrics(cm: ConfusionMatrix) -> dict[str, float | None]:
    return {
        "accuracy": accuracy(cm),
        "precision": precision(cm),
        "recall": recall(cm),
        "specificity": specificity(cm),
        "mcc": mcc(cm),
    }
