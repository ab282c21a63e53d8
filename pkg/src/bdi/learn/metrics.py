"""Confusion counts and the six reported classification metrics (phishing = positive)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fn: int
    tn: int
    fp: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.tn, self.fp) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self):
        return self.tp + self.fn + self.tn + self.fp

    def __add__(self, other):
        return ConfusionCounts(self.tp + other.tp, self.fn + other.fn,
                               self.tn + other.tn, self.fp + other.fp)

    @classmethod
    def from_predictions(cls, y_true, y_pred):
        """Both arrays use 1 = phishing (T), 0 = legitimate (F)."""
        t = np.asarray(y_true).astype(bool)
        p = np.asarray(y_pred).astype(bool)
        return cls(int((t & p).sum()), int((t & ~p).sum()), int((~t & ~p).sum()), int((~t & p).sum()))


@dataclass(frozen=True)
class MetricsReport:
    tpr: float
    fpr: float
    precision: float
    recall: float
    f_measure: float
    accuracy: float
    train_time: float = 0.0
    predict_time: float = 0.0
    counts: ConfusionCounts | None = None
    # metrics whose denominator was zero and were reported as 0
    undefined: frozenset = field(default_factory=frozenset)

    def as_dict(self, timing=True):
        d = {k: getattr(self, k) for k in ("tpr", "fpr", "precision", "recall", "f_measure", "accuracy")}
        if timing:
            d["train_s"] = self.train_time
            d["predict_s"] = self.predict_time
        if self.counts is not None:
            d.update(tp=self.counts.tp, fn=self.counts.fn, tn=self.counts.tn, fp=self.counts.fp)
        if self.undefined:
            d["undefined"] = sorted(self.undefined)
        return d


def _ratio(num, den, name, undefined):
    if den == 0:
        undefined.add(name)
        return 0.0
    return num / den


def compute_metrics(counts, train_time=0.0, predict_time=0.0):
    if counts.total == 0:
        raise ValueError("cannot compute metrics from all-zero counts")
    undef = set()
    tp, fn, tn, fp = counts.tp, counts.fn, counts.tn, counts.fp
    tpr = _ratio(tp, tp + fn, "tpr", undef)
    fpr = _ratio(fp, fp + tn, "fpr", undef)
    precision = _ratio(tp, tp + fp, "precision", undef)
    recall = _ratio(tp, tp + fn, "recall", undef)
    if precision + recall == 0:
        undef.add("f_measure")
        f = 0.0
    else:
        f = 2 * precision * recall / (precision + recall)
    acc = (tp + tn) / counts.total
    return MetricsReport(tpr, fpr, precision, recall, f, acc, train_time, predict_time,
                         counts, frozenset(undef))
