"""
From page snapshot to ternary feature vector
============================================

A snapshot holds what the fetcher saw: certificate CN, cookie domains and the
HTML. Five domains are pulled out of it and compared with the page's own domain.
"""

import tempfile

from bdi.domains import parse_url_domain
from bdi.encode import FEATURE_NAMES, encode_vector
from bdi.extract import extract_all
from bdi.fixtures import page_from_codes, walkthrough_snapshot
from bdi.snapshot import load_snapshot, save_snapshot

snap = walkthrough_snapshot()
parts = parse_url_domain(snap.final_url)
ids = extract_all(snap)
print(ids)
print(encode_vector(ids, parts).values())  # all five point home

# swap the certificate for someone else's
fake = walkthrough_snapshot(cn="github.com")
print(encode_vector(extract_all(fake), parts).values())

# a page whose form posts away and whose logo is hot-linked from the brand
codes = {"FAD": -1, "LD": -1, "CN": 0, "MCLD": 1, "CD": 0}
phish = page_from_codes(codes, "secure-login-42.net", "paypal.com")
v = encode_vector(extract_all(phish), parse_url_domain(phish.final_url))
print({f: v.get(f) for f in FEATURE_NAMES})

# snapshots are plain JSON files, named by content
with tempfile.TemporaryDirectory() as d:
    path = save_snapshot(snap, d)
    print(path.name, load_snapshot(path) == snap)
