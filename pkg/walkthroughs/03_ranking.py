"""
Ranking the five features
=========================

"""

from bdi.domains import parse_url_domain
from bdi.encode import Dataset, encode_vector
from bdi.extract import extract_all
from bdi.fixtures import fixture_corpus
from bdi.select import format_report, rank_report
from bdi.synthetic import generate

# 40 hand-built pages, half phishing
vecs = [encode_vector(extract_all(s), parse_url_domain(s.final_url), label)
        for s, label, _ in fixture_corpus(40)]
print(format_report(rank_report(Dataset(tuple(vecs)), relieff_k=5)))
print()

# on synthetic data where only LD and MCLD carry signal
ds = generate(5000, seed=1, informative=("LD", "MCLD"))
print(format_report(rank_report(ds, relieff_m=500, seed=1)))
