"""Categorical naive Bayes, decision tree and random forest over ternary features."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..encode import FEATURE_NAMES, FeatureVector
from . import lattice as lt

FORMAT_VERSION = 1
KINDS = ("NaiveBayes", "DecisionTree", "RandomForest")
ALIASES = {"nb": "NaiveBayes", "dt": "DecisionTree", "rf": "RandomForest"}


class VersionError(ValueError):
    pass


class MalformedModel(ValueError):
    pass


def canonical_kind(kind):
    kind = ALIASES.get(kind.lower(), kind) if isinstance(kind, str) else kind
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS} or {sorted(ALIASES)}")
    return kind


def check_subset(subset):
    subset = tuple(subset)
    if not subset:
        raise ValueError("feature subset is empty")
    bad = [f for f in subset if f not in FEATURE_NAMES]
    if bad or len(set(subset)) != len(subset):
        raise ValueError(f"invalid feature subset {subset}")
    return subset


@dataclass
class TrainedModel:
    kind: str
    feature_subset: tuple
    parameters: dict
    seed: int | None = None
    format_version: int = FORMAT_VERSION
    _table: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def table(self):
        """Predicted class (1 = T) for each of the 3**d input patterns."""
        if self._table is None:
            self._table = _table_from_parameters(self.kind, self.feature_subset, self.parameters)
        return self._table

    def to_dict(self):
        return {
            "format_version": self.format_version,
            "kind": self.kind,
            "feature_subset": list(self.feature_subset),
            "seed": self.seed,
            "parameters": self.parameters,
        }


# -- fitting on count tables ------------------------------------------------------

def nb_log_posteriors(class_counts, value_counts, alpha):
    """(3**d, 2) unnormalised log posteriors from (2,) and (d, 3, 2) counts."""
    class_counts = np.asarray(class_counts, dtype=float)
    value_counts = np.asarray(value_counts, dtype=float)
    d = value_counts.shape[0]
    lat = lt.lattice(d)
    cond = (value_counts + alpha) / (class_counts + 3 * alpha)  # (d, 3, 2)
    with np.errstate(divide="ignore"):
        logp = np.log(class_counts / class_counts.sum()) + np.zeros((lat.n_patterns, 2))
        logc = np.log(cond)
    for f in range(d):
        logp = logp + logc[f, lat.digits[:, f]]
    return logp


def _nb_value_counts(C):
    Q = C.shape[0]
    d = int(round(math.log(Q, 3)))
    lat = lt.lattice(d)
    vc = np.zeros((d, 3, 2), dtype=np.int64)
    for f in range(d):
        for v in range(3):
            vc[f, v] = C[lat.digits[:, f] == v].sum(axis=0)
    return vc


def fit_naive_bayes(C, alpha=1.0):
    """Returns (table, parameters-builder)."""
    class_counts = C.sum(axis=0)
    vc = _nb_value_counts(C)
    logp = nb_log_posteriors(class_counts, vc, alpha)
    table = (logp[:, 1] > logp[:, 0]).astype(np.int8)

    def params(names):
        return {
            "class_counts": {"F": int(class_counts[0]), "T": int(class_counts[1])},
            "value_counts": {
                f: {"F": vc[i, :, 0].tolist(), "T": vc[i, :, 1].tolist()} for i, f in enumerate(names)
            },
        }
    return table, params


def fit_trees(counts, criterion="entropy", max_depth=None, min_leaf=1, n_candidates=None, rng=None):
    """Grow a batch of trees; returns (per-tree tables, parameters-builder)."""
    split, N = lt.grow(counts, criterion, max_depth, min_leaf, n_candidates, rng)
    tables = lt.predict_table(split, N)

    def params(names):
        return [lt.export_tree(split[t], N[t], names) for t in range(split.shape[0])]
    return tables, params


def vote(tables):
    """Majority vote over trees; ties go to legitimate."""
    votes = tables.sum(axis=0, dtype=np.int64)
    return (2 * votes > tables.shape[0]).astype(np.int8)


def forest_counts(C, n_trees, bootstrap, rng):
    """Per-tree training count tables.

    A bootstrap of n rows drawn with replacement has the same distribution over
    count tables as a multinomial draw of n over the empirical cell frequencies,
    which is what is sampled here.
    """
    C = np.asarray(C)
    if not bootstrap:
        return np.broadcast_to(C, (n_trees,) + C.shape).astype(float)
    n = int(C.sum())
    draws = rng.multinomial(n, C.ravel() / n, size=n_trees)
    return draws.reshape((n_trees,) + C.shape).astype(float)


def default_features_per_split(d):
    return max(1, math.isqrt(d))


def _hyper_dt(max_depth=None, min_leaf=1, criterion="entropy"):
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    if criterion not in ("entropy", "gini"):
        raise ValueError(f"unknown criterion {criterion!r}")
    return {"max_depth": max_depth, "min_leaf": min_leaf, "criterion": criterion}


def fit_counts(kind, C, hyper, rng=None):
    """Fit ``kind`` on a (3**d, 2) count table.

    Returns ``(table, params_builder)`` where ``params_builder(names)`` yields
    the JSON-serialisable learned state.
    """
    if kind == "NaiveBayes":
        return fit_naive_bayes(C, hyper.get("laplace_alpha", 1.0))
    tree_kw = {k: hyper[k] for k in ("criterion", "max_depth", "min_leaf")}
    if kind == "DecisionTree":
        tables, build = fit_trees(np.asarray(C, dtype=float)[None], **tree_kw)
        return tables[0], lambda names: build(names)[0]
    counts = forest_counts(C, hyper["n_trees"], hyper["bootstrap"], rng)
    tables, build = fit_trees(counts, n_candidates=hyper["features_per_split"], rng=rng, **tree_kw)
    return vote(tables), build


def resolve_hyper(kind, d, **kw):
    """Fill defaults and validate hyper-parameters for ``kind`` with ``d`` features."""
    if kind == "NaiveBayes":
        alpha = float(kw.pop("laplace_alpha", 1.0))
        if kw:
            raise TypeError(f"unexpected NaiveBayes parameters {sorted(kw)}")
        if alpha < 0:
            raise ValueError("laplace_alpha must be >= 0")
        return {"laplace_alpha": alpha}
    hyper = _hyper_dt(kw.pop("max_depth", None), kw.pop("min_leaf", 1), kw.pop("criterion", "entropy"))
    if kind == "RandomForest":
        n_trees = int(kw.pop("n_trees", 100))
        fps = kw.pop("features_per_split", None)
        fps = default_features_per_split(d) if fps is None else int(fps)
        if n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if not 1 <= fps <= d:
            raise ValueError(f"features_per_split must be in 1..{d}")
        hyper.update(n_trees=n_trees, features_per_split=fps, bootstrap=bool(kw.pop("bootstrap", True)))
    if kw:
        raise TypeError(f"unexpected {kind} parameters {sorted(kw)}")
    return hyper


def _table_from_parameters(kind, subset, params):
    if kind == "NaiveBayes":
        vc = np.array([[params["value_counts"][f]["F"], params["value_counts"][f]["T"]] for f in subset])
        vc = vc.transpose(0, 2, 1)  # (d, 3, 2)
        cc = [params["class_counts"]["F"], params["class_counts"]["T"]]
        logp = nb_log_posteriors(cc, vc, params["hyper"]["laplace_alpha"])
        return (logp[:, 1] > logp[:, 0]).astype(np.int8)
    if kind == "DecisionTree":
        return lt.tree_table(params["tree"], subset)
    return vote(np.stack([lt.tree_table(t, subset) for t in params["trees"]]))


# -- public training API ----------------------------------------------------------

def _train(kind, ds, subset, seed=None, **kw):
    kind = canonical_kind(kind)
    subset = check_subset(subset)
    ds.require_both_classes()
    hyper = resolve_hyper(kind, len(subset), **kw)
    C = lt.count_table(ds.columns(subset), ds.y)
    rng = np.random.default_rng(seed)
    table, build = fit_counts(kind, C, hyper, rng)
    params = {"hyper": hyper}
    learned = build(subset)
    if kind == "NaiveBayes":
        params.update(learned)
    elif kind == "DecisionTree":
        params["tree"] = learned
    else:
        params["trees"] = learned
    return TrainedModel(kind, subset, params, seed, FORMAT_VERSION, table)


def train_naive_bayes(ds, subset=FEATURE_NAMES, laplace_alpha=1.0):
    return _train("NaiveBayes", ds, subset, laplace_alpha=laplace_alpha)


def train_decision_tree(ds, subset=FEATURE_NAMES, max_depth=None, min_leaf=1, criterion="entropy"):
    return _train("DecisionTree", ds, subset, max_depth=max_depth, min_leaf=min_leaf, criterion=criterion)


def train_random_forest(ds, subset=FEATURE_NAMES, n_trees=100, features_per_split=None, seed=0,
                        bootstrap=True, max_depth=None, min_leaf=1, criterion="entropy"):
    return _train("RandomForest", ds, subset, seed=seed, n_trees=n_trees,
                  features_per_split=features_per_split, bootstrap=bootstrap,
                  max_depth=max_depth, min_leaf=min_leaf, criterion=criterion)


def train(kind, ds, subset=FEATURE_NAMES, seed=0, **hyper):
    return _train(kind, ds, subset, seed=seed, **hyper)


# -- prediction -------------------------------------------------------------------

def predict_many(model, X):
    """Predictions (1 = T) for an (n, 5) matrix in FEATURE_NAMES column order."""
    X = np.asarray(X)
    cols = [FEATURE_NAMES.index(f) for f in model.feature_subset]
    return model.table[lt.pattern_index(X[:, cols])]


def predict(model, x):
    if isinstance(x, FeatureVector):
        row = [x.get(f) for f in FEATURE_NAMES]
    else:
        row = list(x)
    return "T" if predict_many(model, np.array([row]))[0] else "F"


def naive_bayes_posterior(model, x):
    """P(T | x) under a naive Bayes model."""
    if model.kind != "NaiveBayes":
        raise ValueError("posterior is only defined for NaiveBayes models")
    p = model.parameters
    vc = np.array([[p["value_counts"][f]["F"], p["value_counts"][f]["T"]] for f in model.feature_subset])
    cc = [p["class_counts"]["F"], p["class_counts"]["T"]]
    logp = nb_log_posteriors(cc, vc.transpose(0, 2, 1), p["hyper"]["laplace_alpha"])
    q = lt.pattern_index(np.array([[x.get(f) for f in model.feature_subset]]))[0]
    a, b = logp[q]
    return float(1.0 / (1.0 + math.exp(a - b)))


# -- persistence --------------------------------------------------------------------

def model_json(model):
    return json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":"))


def model_id(model):
    return hashlib.sha256(model_json(model).encode("utf-8")).hexdigest()[:12]


def save_model(model, path):
    Path(path).write_text(model_json(model) + "\n", encoding="utf-8")
    return Path(path)


def model_from_dict(d):
    if not isinstance(d, dict) or "format_version" not in d:
        raise MalformedModel("missing format_version")
    if d["format_version"] != FORMAT_VERSION:
        raise VersionError(f"unsupported model format_version {d['format_version']!r}")
    try:
        model = TrainedModel(
            kind=canonical_kind(d["kind"]),
            feature_subset=check_subset(d["feature_subset"]),
            parameters=d["parameters"],
            seed=d.get("seed"),
        )
        model.table  # validates the learned state eagerly
    except (KeyError, TypeError, ValueError, IndexError) as e:
        if isinstance(e, VersionError):
            raise
        raise MalformedModel(f"bad model record: {e!r}") from None
    return model


def load_model(path):
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise MalformedModel(f"{path}: {e}") from None
    return model_from_dict(d)
