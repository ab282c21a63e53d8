import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bdi.domains import parse_url_domain
from bdi.encode import (CSV_HEADER, FEATURE_NAMES, Dataset, FeatureVector, MalformedRow,
                        OneClassDataset, SchemaError, build_dataset, encode_feature, encode_vector,
                        read_feature_csv, write_feature_csv)
from bdi.extract import IdentifiedDomains


def test_encode_feature(rules):
    parts = parse_url_domain("https://login.bank.co.uk/", rules)
    assert encode_feature(None, parts) == 0
    assert encode_feature("login.bank.co.uk", parts) == 1
    assert encode_feature("bank.co.uk", parts) == 1
    assert encode_feature("co.uk", parts) == -1
    assert encode_feature("other.bank.co.uk", parts) == -1
    assert encode_feature("bank.com", parts) == -1


def test_vector_field_mapping(rules):
    parts = parse_url_domain("https://a.com/", rules)
    ids = IdentifiedDomains(cn="a.com", cookie=None, most_common_link="b.com", logo="a.com",
                            form_action="b.com")
    v = encode_vector(ids, parts, "T", "https://a.com/")
    assert v.values() == (-1, 1, 1, -1, 0)
    assert {f: v.get(f) for f in FEATURE_NAMES} == {"FAD": -1, "LD": 1, "CN": 1, "MCLD": -1, "CD": 0}
    assert v.n_present == 4


def test_vector_validation():
    with pytest.raises(ValueError):
        FeatureVector(2, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        FeatureVector(0, 0, 0, 0, 0, label="X")


def test_exhaustive_codes(rules):
    parts = parse_url_domain("https://www.site.org/", rules)
    choice = {1: "site.org", -1: "evil.net", 0: None}
    for combo in itertools.product((-1, 0, 1), repeat=5):
        ids = IdentifiedDomains(**{
            name: choice[c] for name, c in
            zip(("form_action", "logo", "cn", "most_common_link", "cookie"), combo)
        })
        assert encode_vector(ids, parts).values() == combo


_host = st.from_regex(r"[a-z]{1,6}\.(com|org|net|co\.uk)", fullmatch=True)


@given(page=_host, ident=st.one_of(st.none(), _host))
def test_encoding_rule_property(rules, page, ident):
    parts = parse_url_domain("https://" + page, rules)
    code = encode_feature(ident, parts)
    if ident is None:
        assert code == 0
    else:
        assert code == (1 if ident in (parts.full_domain, parts.root_domain) else -1)


def _vec(vals, label="T", url="u"):
    return FeatureVector(*vals, label=label, source_url=url)


def test_build_dataset_filter():
    rows = [_vec((1, 1, 1, 0, 0)), _vec((1, 1, 0, 0, 0), "F"), _vec((0, 0, 0, 0, 0), "F")]
    ds = build_dataset(rows)
    assert len(ds) == 1
    assert "kept 1 of 3" in ds.provenance
    assert len(build_dataset(rows, min_present=0)) == 3
    with pytest.warns(UserWarning):
        build_dataset(rows, min_present=5)
    with pytest.raises(ValueError):
        build_dataset([FeatureVector(1, 1, 1, 1, 1)])


def test_dataset_arrays():
    ds = Dataset((_vec((1, -1, 0, 1, 1), "T"), _vec((0, 0, 1, 1, -1), "F")))
    assert ds.X.dtype == np.int8 and ds.X.shape == (2, 5)
    assert ds.y.tolist() == [1, 0]
    assert ds.columns(("CD", "FAD")).tolist() == [[1, 1], [-1, 0]]
    assert ds.class_counts() == {"T": 1, "F": 1}
    ds.require_both_classes()
    with pytest.raises(OneClassDataset):
        Dataset((_vec((1, 1, 1, 1, 1)),)).require_both_classes()
    assert Dataset(()).X.shape == (0, 5)


def test_csv_round_trip(tmp_path):
    rows = (_vec((1, -1, 0, 1, 1), "T", "https://a.com/x?a=1,b=2"),
            _vec((0, 0, 1, 1, -1), "F", "https://b.com/%20path\nnext"))
    ds = Dataset(rows, provenance="test")
    path = tmp_path / "f.csv"
    write_feature_csv(ds, path)
    text = path.read_text()
    assert text.splitlines()[0] == CSV_HEADER
    assert len(text.splitlines()) == 3
    back = read_feature_csv(path)
    assert back == ds
    assert [r.source_url for r in back.records] == [r.source_url for r in rows]


@pytest.mark.parametrize("body,exc", [
    ("url,label,FAD\n", SchemaError),
    ("", SchemaError),
    (CSV_HEADER + "\nu,T,1,1,1,1\n", MalformedRow),
    (CSV_HEADER + "\nu,X,1,1,1,1,1\n", MalformedRow),
    (CSV_HEADER + "\nu,T,1,1,1,1,2\n", MalformedRow),
    (CSV_HEADER + "\nu,T,1,1,a,1,1\n", MalformedRow),
])
def test_csv_errors(tmp_path, body, exc):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(exc):
        read_feature_csv(path)


def test_malformed_row_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(CSV_HEADER + "\nu,T,1,1,1,1,1\nv,F,0,0\n")
    with pytest.raises(MalformedRow) as info:
        read_feature_csv(path)
    assert info.value.line == 3


def test_from_arrays():
    ds = Dataset.from_arrays([[1, 0, -1, 1, 1]], [1])
    assert ds.records[0] == FeatureVector(1, 0, -1, 1, 1, "T", "row-0")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert ds.X.tolist() == [[1, 0, -1, 1, 1]]


@given(st.lists(st.text(alphabet="ab%,\n\r2C50A", max_size=12), min_size=1, max_size=5))
def test_csv_url_escaping_property(tmp_path_factory, urls):
    ds = Dataset(tuple(_vec((1, 1, 1, 0, 0), "T", u) for u in urls))
    path = tmp_path_factory.mktemp("csv") / "f.csv"
    write_feature_csv(ds, path)
    assert [r.source_url for r in read_feature_csv(path).records] == urls
