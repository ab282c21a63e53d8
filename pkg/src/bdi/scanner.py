"""URL in, verdict out: fetch, extract, encode and classify with a per-feature explanation."""

from __future__ import annotations

import functools
import json
import time
from dataclasses import asdict, dataclass
from importlib import resources

from .domains import DomainError, DomainParts, default_rules, parse_url_domain
from .encode import FEATURE_NAMES, FeatureVector, encode_vector, identified_for
from .extract import DEFAULT_LOGO_KEYWORDS, IdentifiedDomains, extract_all
from .learn.models import model_from_dict, model_id, predict
from .snapshot import FetchError, FetchPolicy, fetch_snapshot, load_snapshot

STATUS = {1: "match", 0: "absent", -1: "mismatch"}


class ScanFailed(Exception):
    def __init__(self, stage, detail):
        super().__init__(f"{stage}: {detail}")
        self.stage = stage
        self.detail = detail


@dataclass(frozen=True)
class ScanResult:
    url: str
    parts: DomainParts
    identified: IdentifiedDomains
    vector: FeatureVector
    verdict: str
    per_feature_explanation: dict
    model_id: str
    elapsed: float
    insufficient_evidence: bool

    def to_dict(self):
        parts = asdict(self.parts)
        parts.update(full_domain=self.parts.full_domain, root_domain=self.parts.root_domain)
        identified = asdict(self.identified)
        identified["notes"] = list(identified["notes"])
        return {
            "url": self.url,
            "parts": parts,
            "identified": identified,
            "vector": {f: self.vector.get(f) for f in FEATURE_NAMES},
            "verdict": self.verdict,
            "per_feature_explanation": self.per_feature_explanation,
            "model_id": self.model_id,
            "elapsed": self.elapsed,
            "insufficient_evidence": self.insufficient_evidence,
        }


@functools.lru_cache(maxsize=None)
def _demo_model_text():
    return resources.files("bdi").joinpath("data/demo_model.json").read_text(encoding="utf-8")


def load_demo_model():
    """The bundled demonstration forest (trained on synthetic data, not for production)."""
    return model_from_dict(json.loads(_demo_model_text()))


def scan_snapshot(snap, model=None, rules=None, keywords=DEFAULT_LOGO_KEYWORDS, started=None):
    started = time.perf_counter() if started is None else started
    model = model or load_demo_model()
    rules = rules or default_rules()
    try:
        parts = parse_url_domain(snap.final_url, rules)
    except DomainError as e:
        raise ScanFailed("domain", str(e)) from e
    ids = extract_all(snap, rules, keywords)
    vec = encode_vector(ids, parts, source_url=snap.final_url)
    explanation = {
        f: {"identified": identified_for(ids, f), "code": vec.get(f), "status": STATUS[vec.get(f)]}
        for f in FEATURE_NAMES
    }
    return ScanResult(
        url=snap.requested_url,
        parts=parts,
        identified=ids,
        vector=vec,
        verdict=predict(model, vec),
        per_feature_explanation=explanation,
        model_id=model_id(model),
        elapsed=time.perf_counter() - started,
        insufficient_evidence=sum(v == 0 for v in vec.values()) >= 3,
    )


def scan(url, model=None, policy=None, rules=None, keywords=DEFAULT_LOGO_KEYWORDS):
    started = time.perf_counter()
    try:
        snap = fetch_snapshot(url, policy or FetchPolicy())
    except FetchError as e:
        raise ScanFailed(e.stage, str(e)) from e
    except ValueError as e:
        raise ScanFailed("url", str(e)) from e
    return scan_snapshot(snap, model, rules, keywords, started)


def scan_offline(snapshot_path, model=None, rules=None, keywords=DEFAULT_LOGO_KEYWORDS):
    started = time.perf_counter()
    return scan_snapshot(load_snapshot(snapshot_path), model, rules, keywords, started)
