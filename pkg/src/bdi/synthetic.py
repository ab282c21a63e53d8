"""Seeded generator of labeled ternary feature data with known Bayes accuracy.

Each feature is drawn independently given the class from a three-point
distribution over (-1, 0, +1).
"""

from __future__ import annotations

import itertools

import numpy as np

from .encode import FEATURE_NAMES, Dataset

# P(-1), P(0), P(+1)
LEGIT_PROBS = (0.03, 0.07, 0.90)
PHISH_PROBS = (0.75, 0.15, 0.10)


def generate(n, seed=0, phishing_fraction=0.5, legit_probs=LEGIT_PROBS, phish_probs=PHISH_PROBS,
             informative=FEATURE_NAMES):
    """``n`` shuffled records with exactly ``round(n * phishing_fraction)`` phishing rows.

    Features outside ``informative`` use the legitimate distribution for both
    classes, i.e. carry no class signal.
    """
    rng = np.random.default_rng(seed)
    n_t = int(round(n * phishing_fraction))
    y = np.zeros(n, dtype=np.int8)
    y[:n_t] = 1
    y = rng.permutation(y)
    X = np.empty((n, len(FEATURE_NAMES)), dtype=np.int8)
    vals = np.array([-1, 0, 1], dtype=np.int8)
    for j, f in enumerate(FEATURE_NAMES):
        pt = phish_probs if f in informative else legit_probs
        col_t = rng.choice(vals, size=n, p=pt)
        col_f = rng.choice(vals, size=n, p=legit_probs)
        X[:, j] = np.where(y == 1, col_t, col_f)
    urls = [f"synthetic-{seed}-{i}" for i in range(n)]
    return Dataset.from_arrays(X, y, urls, provenance=f"synthetic n={n} seed={seed}")


def bayes_optimal_accuracy(n_features, phishing_fraction=0.5, legit_probs=LEGIT_PROBS,
                           phish_probs=PHISH_PROBS):
    """Exact Bayes-optimal accuracy on ``n_features`` conditionally independent features,
    by enumerating all 3**n_features patterns."""
    acc = 0.0
    for pattern in itertools.product(range(3), repeat=n_features):
        pt = phishing_fraction * np.prod([phish_probs[v] for v in pattern])
        pf = (1 - phishing_fraction) * np.prod([legit_probs[v] for v in pattern])
        acc += max(pt, pf)
    return float(acc)
