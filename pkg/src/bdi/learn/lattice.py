"""Greedy multiway trees over ternary features, grown on class-count tables.

With ``d`` ternary inputs there are only ``3**d`` distinct input patterns, so a
training set reduces to a ``(3**d, 2)`` table of class counts. Every node a
greedy tree can ever reach is a partial assignment of feature values, and there
are ``4**d`` of those (each feature free or fixed to one of three values).

Instead of recursing, the grower evaluates the split decision of *every*
partial assignment at once, for a whole batch of trees; the decision at a node
depends only on the counts at that node, so this is the same tree recursive
induction would produce. A forest of 100 trees over 5 features is one set of
array operations on a ``(100, 1024, 5, 3)`` block.

Encodings used throughout:

* pattern index ``q = sum((x_f + 1) * 3**f)``
* partial assignment ``p = sum(code_f * 4**f)`` with code 0 = free and
  1..3 = fixed to value -1/0/+1.
"""

from __future__ import annotations

import functools

import numpy as np

GAIN_EPS = 1e-12


class Lattice:
    def __init__(self, d):
        self.d = d
        self.n_patterns = 3**d
        self.n_nodes = 4**d
        q = np.arange(self.n_patterns)
        self.digits = (q[:, None] // 3 ** np.arange(d)) % 3  # (Q, d) in 0..2
        p = np.arange(self.n_nodes)
        self.codes = (p[:, None] // 4 ** np.arange(d)) % 4  # (P, d) in 0..3
        self.depth = (self.codes > 0).sum(axis=1)
        free = self.codes == 0
        self.member = np.all(
            free[:, None, :] | (self.codes[:, None, :] == self.digits[None, :, :] + 1), axis=2
        ).astype(float)  # (P, Q)
        child = p[:, None, None] + (np.arange(3)[None, None, :] + 1) * (4 ** np.arange(d))[None, :, None]
        self.child = np.where(free[:, :, None], child, -1)  # (P, d, 3)


@functools.lru_cache(maxsize=None)
def lattice(d):
    return Lattice(d)


def pattern_index(X):
    """Row-wise pattern index of an (n, d) ternary matrix."""
    X = np.asarray(X, dtype=np.int64)
    return (X + 1) @ (3 ** np.arange(X.shape[1], dtype=np.int64))


def count_table(X, y):
    """(3**d, 2) class counts; column 0 = legitimate, 1 = phishing."""
    d = X.shape[1]
    q = pattern_index(X)
    c = np.bincount(q * 2 + np.asarray(y, dtype=np.int64), minlength=2 * 3**d)
    return c.reshape(3**d, 2)


def impurity(counts, criterion):
    """Node impurity along the last axis (size 2)."""
    n = counts.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(n[..., None] > 0, counts / n[..., None], 0.0)
        if criterion == "entropy":
            return -np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0).sum(axis=-1)
    if criterion == "gini":
        return 1.0 - (p * p).sum(axis=-1)
    raise ValueError(f"unknown criterion {criterion!r}")


def majority(counts):
    """1 (phishing) only on a strict majority; ties and empty nodes go to 0."""
    return (counts[..., 1] > counts[..., 0]).astype(np.int8)


def split_gains(N, lat, criterion):
    """Gain of splitting each node on each feature: (T, P, d), plus child sizes (T, P, d, 3)."""
    n = N.sum(axis=-1)
    child = np.where(lat.child >= 0, lat.child, 0)
    CN = N[:, child]  # (T, P, d, 3, 2)
    nv = CN.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        wimp = (nv * impurity(CN, criterion)).sum(axis=-1) / n[..., None]
    gain = impurity(N, criterion)[..., None] - wimp
    return np.nan_to_num(gain, nan=0.0), nv


def grow(counts, criterion="entropy", max_depth=None, min_leaf=1, n_candidates=None, rng=None):
    """Grow one tree per count table in ``counts`` (T, 3**d, 2).

    Returns ``(split, N)``: ``split[t, p]`` is the feature index node ``p``
    splits on (-1 for a leaf) and ``N[t, p]`` its class counts. With
    ``n_candidates`` below the number of free features, each node only
    considers a random subset of that size (drawn from ``rng``).
    """
    counts = np.asarray(counts, dtype=float)
    T, Q, _ = counts.shape
    d = int(round(np.log(Q) / np.log(3)))
    lat = lattice(d)
    max_depth = d if max_depth is None else max_depth
    N = np.matmul(lat.member, counts)  # (T, P, 2)
    gain, nv = split_gains(N, lat, criterion)
    free = (lat.child[:, :, 0] >= 0)[None]
    node_ok = (N.sum(axis=-1) > 0) & (impurity(N, criterion) > 0) & (lat.depth < max_depth)[None]
    ok = free & node_ok[..., None] & np.all((nv == 0) | (nv >= min_leaf), axis=-1)
    if n_candidates is not None and n_candidates < d:
        keys = rng.random((T, lat.n_nodes, d))
        keys[~np.broadcast_to(free, keys.shape)] = np.inf
        ranks = keys.argsort(axis=-1).argsort(axis=-1)
        ok &= ranks < n_candidates
    gain = np.where(ok, gain, -np.inf)
    best_gain = gain.max(axis=-1)
    # first feature (in subset order) within tolerance of the best gain
    best = np.argmax(gain >= best_gain[..., None] - GAIN_EPS, axis=-1)
    split = np.where(best_gain > GAIN_EPS, best, -1)
    return split, N


def predict_table(split, N):
    """Predicted class (T, 3**d) for every input pattern under every tree.

    A child node with no training records falls back to its parent's majority.
    """
    T, P = split.shape
    d = int(round(np.log(P) / np.log(4)))
    lat = lattice(d)
    n = N.sum(axis=-1)
    t = np.arange(T)[:, None]
    q = np.arange(lat.n_patterns)[None, :]
    p = np.zeros((T, lat.n_patterns), dtype=np.int64)
    for _ in range(d):
        f = split[t, p]
        go = f >= 0
        fs = np.where(go, f, 0)
        c = lat.child[p, fs, lat.digits[q, fs]]
        step = go & (c >= 0)
        c = np.where(step, c, 0)
        p = np.where(step & (n[t, c] > 0), c, p)
    return majority(N[t, p])


def export_tree(split, N, names, p=0):
    """Nested-dict form of one tree (children with zero records omitted)."""
    node = {"n": [int(round(N[p, 0])), int(round(N[p, 1]))]}
    f = int(split[p])
    if f >= 0:
        lat = lattice(len(names))
        node["split"] = names[f]
        node["children"] = {
            str(v - 1): export_tree(split, N, names, int(lat.child[p, f, v]))
            for v in range(3)
            if N[lat.child[p, f, v]].sum() > 0
        }
    return node


def tree_table(tree, names):
    """Predicted class for every pattern by walking a nested-dict tree."""
    lat = lattice(len(names))
    out = np.zeros(lat.n_patterns, dtype=np.int8)
    col = {f: i for i, f in enumerate(names)}
    for q in range(lat.n_patterns):
        node = tree
        while "split" in node:
            nxt = node["children"].get(str(int(lat.digits[q, col[node["split"]]]) - 1))
            if nxt is None:
                break
            node = nxt
        out[q] = 1 if node["n"][1] > node["n"][0] else 0
    return out
