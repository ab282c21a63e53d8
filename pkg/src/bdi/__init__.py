"""Brand-domain identification features for phishing detection.

Pipeline: :mod:`bdi.snapshot` (fetch / store pages) -> :mod:`bdi.extract`
(five candidate domains) -> :mod:`bdi.encode` (ternary match codes) ->
:mod:`bdi.select` (attribute ranking) and :mod:`bdi.learn` (classifiers and
evaluation). :mod:`bdi.scanner` runs the whole chain on one URL.
"""

from .domains import DomainParts, SuffixRules, default_rules, domains_match, load_suffix_rules, normalize_domain, parse_url_domain
from .encode import FEATURE_NAMES, Dataset, FeatureVector, build_dataset, encode_feature, encode_vector, read_feature_csv, write_feature_csv
from .extract import IdentifiedDomains, extract_all
from .snapshot import FetchPolicy, PageSnapshot, fetch_batch, fetch_snapshot, load_snapshot, save_snapshot

__version__ = "0.1.0"
