"""Cross-validation, holdout evaluation and the exhaustive feature-subset sweep."""

from __future__ import annotations

import io
import itertools
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..encode import FEATURE_NAMES
from . import lattice as lt
from .metrics import ConfusionCounts, compute_metrics
from .models import KINDS, canonical_kind, check_subset, fit_counts, resolve_hyper

SWEEP_COLUMNS = ("n_features", "subset", "model", "tpr", "fpr", "precision", "recall",
                 "f_measure", "accuracy", "train_s", "predict_s", "is_best")


def kfold_test_indices(y, k, stratified=True, rng=None):
    """Test-fold index arrays that partition ``range(len(y))``.

    Records are shuffled (within class when stratified), laid out class after
    class, and dealt round-robin, so fold sizes differ by at most one overall
    and per class.
    """
    y = np.asarray(y)
    n = len(y)
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise ValueError(f"k={k} exceeds the {n} records")
    rng = rng if rng is not None else np.random.default_rng(0)
    if stratified:
        counts = {c: int((y == c).sum()) for c in np.unique(y)}
        if min(counts.values()) < k:
            raise ValueError(f"stratified {k}-fold needs >= {k} records per class, got {counts}")
        order = np.concatenate([rng.permutation(np.flatnonzero(y == c)) for c in sorted(counts)])
    else:
        order = rng.permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[order] = np.arange(n) % k
    return [np.flatnonzero(fold_of == i) for i in range(k)]


def holdout_split(y, train_fraction=0.8, stratified=True, rng=None):
    """(train_idx, test_idx). Per-class train sizes are apportioned by largest remainder."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    y = np.asarray(y)
    n = len(y)
    rng = rng if rng is not None else np.random.default_rng(0)
    n_train = int(np.floor(train_fraction * n + 0.5))
    if not stratified:
        perm = rng.permutation(n)
        return np.sort(perm[:n_train]), np.sort(perm[n_train:])
    classes = np.unique(y)
    groups = [rng.permutation(np.flatnonzero(y == c)) for c in classes]
    exact = np.array([train_fraction * len(g) for g in groups])
    take = np.floor(exact).astype(int)
    short = n_train - take.sum()
    for i in np.argsort(-(exact - take), kind="stable")[:max(short, 0)]:
        take[i] += 1
    train = np.concatenate([g[:t] for g, t in zip(groups, take)])
    test = np.concatenate([g[t:] for g, t in zip(groups, take)])
    return np.sort(train), np.sort(test)


def _cell_rng(seed, *key):
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))


def _evaluate_splits(kind, Xs, y, splits, hyper, model_seed):
    """Train/test over (train_idx, test_idx) pairs; pooled counts, mean timings."""
    q = lt.pattern_index(Xs)
    total = ConfusionCounts(0, 0, 0, 0)
    t_train = t_pred = 0.0
    for i, (tr, te) in enumerate(splits):
        if len(np.unique(y[tr])) < 2:
            raise ValueError("a training part lacks one of the classes")
        t0 = time.perf_counter()
        C = lt.count_table(Xs[tr], y[tr])
        table, _ = fit_counts(kind, C, hyper, _cell_rng(model_seed, i))
        t1 = time.perf_counter()
        pred = table[q[te]]
        t2 = time.perf_counter()
        total = total + ConfusionCounts.from_predictions(y[te], pred)
        t_train += t1 - t0
        t_pred += t2 - t1
    return compute_metrics(total, t_train / len(splits), t_pred / len(splits))


def cross_validate(ds, kind, subset=FEATURE_NAMES, k=10, stratified=True, seed=0,
                   model_seed=None, **hyper):
    """k-fold CV; metrics come from confusion counts pooled over the folds.

    ``seed`` fixes the fold assignment; model randomness is drawn from
    ``model_seed`` (defaults to ``seed``) with one stream per fold.
    """
    kind = canonical_kind(kind)
    subset = check_subset(subset)
    ds.require_both_classes()
    hyper = resolve_hyper(kind, len(subset), **hyper)
    y = ds.y.astype(np.int64)
    folds = kfold_test_indices(y, k, stratified, np.random.default_rng(seed))
    every = np.arange(len(y))
    splits = [(np.setdiff1d(every, te, assume_unique=True), te) for te in folds]
    return _evaluate_splits(kind, ds.columns(subset), y, splits, hyper,
                            seed if model_seed is None else model_seed)


def holdout_evaluate(ds, kind, subset=FEATURE_NAMES, train_fraction=0.8, stratified=True,
                     seed=0, model_seed=None, **hyper):
    kind = canonical_kind(kind)
    subset = check_subset(subset)
    hyper = resolve_hyper(kind, len(subset), **hyper)
    y = ds.y.astype(np.int64)
    tr, te = holdout_split(y, train_fraction, stratified, np.random.default_rng(seed))
    if len(te) == 0:
        raise ValueError("holdout test part is empty")
    return _evaluate_splits(kind, ds.columns(subset), y, [(tr, te)], hyper,
                            seed if model_seed is None else model_seed)


def parse_protocol(protocol):
    """``"cv10"`` -> ("cv", 10); ``"holdout80"`` -> ("holdout", 0.8). Tuples pass through."""
    if isinstance(protocol, tuple):
        return protocol
    m = re.fullmatch(r"(cv|holdout)(\d+)", protocol.strip().lower())
    if not m:
        raise ValueError(f"unknown protocol {protocol!r}; use e.g. cv10 or holdout80")
    name, num = m.group(1), int(m.group(2))
    return (name, num) if name == "cv" else (name, num / 100)


def evaluate(ds, kind, subset, protocol="cv10", seed=0, model_seed=None, **hyper):
    name, arg = parse_protocol(protocol)
    if name == "cv":
        return cross_validate(ds, kind, subset, k=arg, seed=seed, model_seed=model_seed, **hyper)
    return holdout_evaluate(ds, kind, subset, train_fraction=arg, seed=seed,
                            model_seed=model_seed, **hyper)


def all_subsets(features=FEATURE_NAMES):
    """Non-empty subsets by size, then lexicographically by position in ``features``."""
    return [c for r in range(1, len(features) + 1) for c in itertools.combinations(features, r)]


@dataclass(frozen=True)
class SweepRow:
    subset: tuple
    best_accuracy: float
    best_model: str
    per_model: dict


@dataclass(frozen=True)
class SweepReport:
    rows: tuple
    protocol: str

    def to_csv(self, timing=True):
        """CSV text; with ``timing=False`` the timing columns are blank so that
        reruns with the same seed compare byte-for-byte."""
        out = io.StringIO()
        out.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in self.rows:
            for kind, m in row.per_model.items():
                cells = [len(row.subset), "+".join(row.subset), kind,
                         *(repr(getattr(m, a)) for a in ("tpr", "fpr", "precision", "recall",
                                                         "f_measure", "accuracy")),
                         f"{m.train_time:.6f}" if timing else "",
                         f"{m.predict_time:.6f}" if timing else "",
                         int(kind == row.best_model)]
                out.write(",".join(map(str, cells)) + "\n")
        return out.getvalue()

    def write_csv(self, path, timing=True):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv(timing))

    def summary(self):
        lines = []
        for r in self.rows:
            lines.append(f"{len(r.subset)}  {'+'.join(r.subset):<22} {100 * r.best_accuracy:6.2f}%  {r.best_model}")
        return "\n".join(lines)


def sweep_combinations(ds, kinds=KINDS, protocol="cv10", seed=0, subsets=None, workers=1, hyper=None,
                       tie_break="kind"):
    """Evaluate every kind on every non-empty feature subset.

    Each (subset, kind) cell draws model randomness from its own stream keyed on
    (seed, subset index, kind index); folds depend on ``seed`` alone. The best
    model per subset is the highest accuracy. Ties go to the earlier kind in
    alphabetical order; ``tie_break="predict_time"`` first prefers the faster
    predictor, which makes reruns depend on wall-clock noise.
    """
    if tie_break not in ("kind", "predict_time"):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    kinds = [canonical_kind(k) for k in kinds]
    subsets = [check_subset(s) for s in (subsets or all_subsets())]
    hyper = hyper or {}
    ds.require_both_classes()
    cells = [(si, s, ki, k) for si, s in enumerate(subsets) for ki, k in enumerate(kinds)]

    def run(cell):
        si, s, ki, k = cell
        mseed = int(np.random.SeedSequence([int(seed), si, KINDS.index(k)]).generate_state(1)[0])
        return evaluate(ds, k, s, protocol, seed=seed, model_seed=mseed, **hyper.get(k, {}))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(c) for c in cells]
    by_cell = {(c[0], c[3]): r for c, r in zip(cells, results)}
    rows = []
    for si, s in enumerate(subsets):
        per = {k: by_cell[si, k] for k in kinds}
        if tie_break == "kind":
            best = min(per, key=lambda k: (-per[k].accuracy, k))
        else:
            best = min(per, key=lambda k: (-per[k].accuracy, per[k].predict_time, k))
        rows.append(SweepRow(s, per[best].accuracy, best, per))
    name, arg = parse_protocol(protocol)
    return SweepReport(tuple(rows), f"{name}{arg if name == 'cv' else round(arg * 100)}")
