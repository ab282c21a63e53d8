"""Filter-style attribute evaluators: correlation, information gain, gain ratio, ReliefF."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .encode import FEATURE_NAMES, OneClassDataset

EVALUATORS = ("Correlation", "InfoGain", "GainRatio", "ReliefF")
_VALUES = (-1, 0, 1)


@dataclass(frozen=True)
class FeatureRanking:
    evaluator: str
    scores: dict
    order: tuple

    @classmethod
    def from_scores(cls, evaluator, scores):
        scores = {f: float(s) for f, s in scores.items()}
        order = tuple(sorted(scores, key=lambda f: (-scores[f], f)))
        return cls(evaluator, scores, order)

    def to_dict(self):
        return {"evaluator": self.evaluator, "scores": self.scores, "order": list(self.order)}


def _check(ds):
    if len(ds) < 2:
        raise ValueError("need at least two records")
    ds.require_both_classes()


def entropy(counts):
    """Base-2 entropy of a count vector (0 log 0 = 0)."""
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts[counts > 0] / n
    return float(-(p * np.log2(p)).sum())


def _contingency(x, y):
    """3x2 table: rows feature value -1/0/1, columns class F/T."""
    return np.array([[np.sum((x == v) & (y == c)) for c in (0, 1)] for v in _VALUES])


def info_gain(x, y):
    table = _contingency(x, y)
    n = table.sum()
    cond = sum(row.sum() / n * entropy(row) for row in table if row.sum())
    return max(0.0, entropy(table.sum(axis=0)) - cond)


def split_info(x):
    return entropy([np.sum(x == v) for v in _VALUES])


def gain_ratio(x, y):
    si = split_info(x)
    return 0.0 if si == 0 else info_gain(x, y) / si


def pearson_abs(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = (dx * dx).sum(), (dy * dy).sum()
    if sxx == 0 or syy == 0:
        return 0.0
    return float(abs((dx * dy).sum()) / np.sqrt(sxx * syy))


def _per_feature(ds, name, fn):
    _check(ds)
    X, y = ds.X, ds.y
    return FeatureRanking.from_scores(name, {f: fn(X[:, i], y) for i, f in enumerate(FEATURE_NAMES)})


def correlation_scores(ds):
    return _per_feature(ds, "Correlation", pearson_abs)


def info_gain_scores(ds):
    return _per_feature(ds, "InfoGain", info_gain)


def gain_ratio_scores(ds):
    return _per_feature(ds, "GainRatio", gain_ratio)


def _relieff_diff_totals(X, y, rows, k, chunk=512):
    """Integer diff totals summed over the sampled ``rows``.

    Returns (hits[c, a], misses[c, C, a]) where c is the sampled row's class and
    C the class of its neighbours. Neighbours are the k nearest by Hamming
    distance, ties broken by record index.
    """
    n, d = X.shape
    classes = np.unique(y)
    n_cls = len(classes)
    cls_idx = np.searchsorted(classes, y)
    members = [np.flatnonzero(cls_idx == c) for c in range(n_cls)]
    hits = np.zeros((n_cls, d), dtype=np.int64)
    misses = np.zeros((n_cls, n_cls, d), dtype=np.int64)
    for start in range(0, len(rows), chunk):
        r = rows[start:start + chunk]
        own = cls_idx[r]
        for c in range(n_cls):
            m = members[c]
            dist = (X[r][:, None, :] != X[m][None, :, :]).sum(axis=2)
            key = dist.astype(np.int64) * n + m[None, :]
            # a row is never its own neighbour
            key[r[:, None] == m[None, :]] = np.iinfo(np.int64).max
            same = own == c
            k_eff = np.where(same, min(k, len(m) - 1), min(k, len(m)))
            kk = int(k_eff.max())
            if kk == 0:
                continue
            if kk < len(m):
                part = np.argpartition(key, kk - 1, axis=1)[:, :kk]
            else:
                part = np.broadcast_to(np.arange(len(m)), (len(r), len(m)))
            part = np.take_along_axis(part, np.argsort(np.take_along_axis(key, part, 1), axis=1), 1)
            nb = m[part]  # (rows, kk) nearest first
            diffs = X[nb] != X[r][:, None, :]  # (rows, kk, d)
            keep = np.arange(kk)[None, :] < k_eff[:, None]
            tot = (diffs & keep[:, :, None]).sum(axis=1)
            for oc in range(n_cls):
                sel = own == oc
                if not sel.any():
                    continue
                if oc == c:
                    hits[oc] += tot[sel].sum(axis=0)
                else:
                    misses[oc, c] += tot[sel].sum(axis=0)
    return hits, misses


def relieff_weights(hits, misses, class_sizes, m, k):
    """Combine integer diff totals into ReliefF weights.

    Hit and miss contributions are divided by the per-class clamped neighbour
    count; misses from class C are weighted by P(C) / (1 - P(own class)).
    """
    class_sizes = np.asarray(class_sizes, dtype=float)
    prior = class_sizes / class_sizes.sum()
    n_cls, d = hits.shape
    w = np.zeros(d)
    for c in range(n_cls):
        k_hit = min(k, int(class_sizes[c]) - 1)
        if k_hit > 0:
            w -= hits[c] / k_hit
        for oc in range(n_cls):
            if oc == c:
                continue
            k_miss = min(k, int(class_sizes[oc]))
            if k_miss > 0:
                w += prior[oc] / (1.0 - prior[c]) * misses[c, oc] / k_miss
    return w / m


def relieff_scores(ds, neighbors_k=10, sample_m=None, seed=0):
    """ReliefF with Hamming distance on the ternary features.

    ``sample_m=None`` uses every record (in index order), which makes the
    result independent of ``seed``.
    """
    if neighbors_k < 1:
        raise ValueError("neighbors_k must be >= 1")
    X, y = ds.X, ds.y
    classes, sizes = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise OneClassDataset("ReliefF needs at least two classes")
    n = len(y)
    if sample_m is None or sample_m >= n:
        rows = np.arange(n)
    else:
        rows = np.sort(np.random.default_rng(seed).choice(n, size=sample_m, replace=False))
    hits, misses = _relieff_diff_totals(X, y, rows, neighbors_k)
    w = relieff_weights(hits, misses, sizes, len(rows), neighbors_k)
    return FeatureRanking.from_scores("ReliefF", dict(zip(FEATURE_NAMES, w)))


def rank_report(ds, relieff_k=10, relieff_m=None, seed=0):
    return [
        correlation_scores(ds),
        info_gain_scores(ds),
        gain_ratio_scores(ds),
        relieff_scores(ds, relieff_k, relieff_m, seed),
    ]


def format_report(rankings):
    """Plain-text table: one evaluator per line, features in rank order with scores."""
    lines = []
    for r in rankings:
        cells = "  ".join(f"{f}={r.scores[f]:.4f}" for f in r.order)
        lines.append(f"{r.evaluator:<12} {cells}")
    return "\n".join(lines)


def write_ranking_json(rankings, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([r.to_dict() for r in rankings], fh, indent=2)
        fh.write("\n")
