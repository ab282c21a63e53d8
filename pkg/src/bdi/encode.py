"""Ternary domain-match encoding, labeled datasets and the feature CSV format."""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .domains import domains_match

FEATURE_NAMES = ("FAD", "LD", "CN", "MCLD", "CD")
# FeatureVector attribute / IdentifiedDomains attribute per feature
_FIELDS = {
    "FAD": ("fad", "form_action"),
    "LD": ("ld", "logo"),
    "CN": ("cn", "cn"),
    "MCLD": ("mcld", "most_common_link"),
    "CD": ("cd", "cookie"),
}
LABELS = ("T", "F")
CSV_HEADER = "url,label," + ",".join(FEATURE_NAMES)


class OneClassDataset(ValueError):
    pass


class MalformedRow(ValueError):
    def __init__(self, line, reason):
        super().__init__(f"line {line}: {reason}")
        self.line = line


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    fad: int
    ld: int
    cn: int
    mcld: int
    cd: int
    label: str | None = None
    source_url: str = ""

    def __post_init__(self):
        for v in self.values():
            if v not in (-1, 0, 1):
                raise ValueError(f"feature value {v!r} not in {{-1, 0, 1}}")
        if self.label is not None and self.label not in LABELS:
            raise ValueError(f"label {self.label!r} not in {LABELS}")

    def values(self):
        return (self.fad, self.ld, self.cn, self.mcld, self.cd)

    def get(self, name):
        return getattr(self, _FIELDS[name][0])

    @property
    def n_present(self):
        return sum(v != 0 for v in self.values())


def identified_for(ids, name):
    """The identified domain that feeds feature ``name``."""
    return getattr(ids, _FIELDS[name][1])


def encode_feature(identified, parts):
    if identified is None:
        return 0
    return 1 if domains_match(identified, parts) else -1


def encode_vector(ids, parts, label=None, source_url=""):
    codes = {_FIELDS[n][0]: encode_feature(identified_for(ids, n), parts) for n in FEATURE_NAMES}
    return FeatureVector(**codes, label=label, source_url=source_url)


@dataclass(frozen=True)
class Dataset:
    records: tuple
    feature_names: tuple = FEATURE_NAMES
    provenance: str = field(default="", compare=False)

    def __len__(self):
        return len(self.records)

    @functools.cached_property
    def X(self):
        """(n, 5) int8 matrix in FEATURE_NAMES order."""
        return np.array([r.values() for r in self.records], dtype=np.int8).reshape(-1, 5)

    @functools.cached_property
    def y(self):
        """1 for phishing (T), 0 for legitimate (F)."""
        return np.array([r.label == "T" for r in self.records], dtype=np.int8)

    def columns(self, subset):
        return self.X[:, [FEATURE_NAMES.index(f) for f in subset]]

    def class_counts(self):
        n_t = int(self.y.sum())
        return {"T": n_t, "F": len(self) - n_t}

    def require_both_classes(self):
        c = self.class_counts()
        if not c["T"] or not c["F"]:
            raise OneClassDataset(f"dataset needs both classes, got {c}")

    @classmethod
    def from_arrays(cls, X, y, urls=None, provenance=""):
        X = np.asarray(X)
        urls = urls if urls is not None else [f"row-{i}" for i in range(len(X))]
        recs = tuple(
            FeatureVector(*map(int, row), label="T" if lab else "F", source_url=u)
            for row, lab, u in zip(X, y, urls)
        )
        return cls(recs, provenance=provenance)


def build_dataset(rows, min_present=3):
    """Keep labeled rows having at least ``min_present`` fetched (nonzero) features."""
    rows = list(rows)
    if any(r.label is None for r in rows):
        raise ValueError("build_dataset requires labeled vectors")
    kept = tuple(r for r in rows if r.n_present >= min_present)
    if not kept:
        warnings.warn("dataset is empty after the inclusion filter", stacklevel=2)
    prov = f"inclusion: >= {min_present} nonzero features; kept {len(kept)} of {len(rows)}"
    return Dataset(kept, provenance=prov)


def _escape_url(url):
    return url.replace("%", "%25").replace(",", "%2C").replace("\n", "%0A").replace("\r", "%0D")


def _unescape_url(url):
    return url.replace("%2C", ",").replace("%0A", "\n").replace("%0D", "\r").replace("%25", "%")


def write_feature_csv(ds, path):
    lines = [CSV_HEADER]
    for r in ds.records:
        if r.label is None:
            raise ValueError(f"unlabeled record {r.source_url!r} cannot be written")
        lines.append(",".join([_escape_url(r.source_url), r.label, *map(str, r.values())]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_feature_csv(path):
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].rstrip("\r") != CSV_HEADER:
        raise SchemaError(f"{path}: expected header {CSV_HEADER!r}")
    recs = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.rstrip("\r").split(",")
        if len(cells) != 7:
            raise MalformedRow(lineno, f"expected 7 fields, got {len(cells)}")
        url, label, *vals = cells
        if label not in LABELS:
            raise MalformedRow(lineno, f"label {label!r} not in T/F")
        if any(v not in ("-1", "0", "1") for v in vals):
            raise MalformedRow(lineno, f"feature values {vals} outside {{-1,0,1}}")
        recs.append(FeatureVector(*map(int, vals), label=label, source_url=_unescape_url(url)))
    return Dataset(tuple(recs), provenance=f"read from {path}")
