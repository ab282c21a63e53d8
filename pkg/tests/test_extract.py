import pytest

from bdi.extract import (IdentifiedDomains, decode_html, extract_all, extract_cn,
                         extract_cookie_domain, extract_form_action_domain, extract_logo_domain,
                         extract_most_common_link_domain, parse_tags)
from bdi.fixtures import EPOCH, make_snapshot
from bdi.snapshot import PageSnapshot

URL = "https://www.shop.example.com/login"


def _page(body, content_type="text/html", url=URL, **kw):
    return PageSnapshot(URL, url, EPOCH, 200, html=body, content_type=content_type, **kw)


@pytest.mark.parametrize("cn,expected", [
    ("*.facebook.com", "facebook.com"),
    ("www.Facebook.com", "facebook.com"),
    ("mail.google.com", "mail.google.com"),
    ("Fortinet Self-Signed", None),
    ("localhost", "localhost"),
    ("", None),
    (None, None),
])
def test_cn(cn, expected):
    assert extract_cn(make_snapshot(URL, cert_cn=cn)) == expected


def test_cn_not_domain_noted(rules):
    ids = extract_all(make_snapshot(URL, cert_cn="Acme Corp CA"), rules)
    assert ids.cn is None
    assert any("not domain-shaped" in n for n in ids.notes)


def test_cookie_mode_and_tie_break():
    snap = make_snapshot(URL, cookie_domains=[".b.com", "b.com", "a.com", "www.c.com", "c.com"])
    # b.com and c.com both count twice; the lexicographically smaller wins
    assert extract_cookie_domain(snap) == "b.com"
    assert extract_cookie_domain(make_snapshot(URL)) is None


def test_most_common_link(rules):
    snap = make_snapshot(URL, links=[
        "/a", "/b", "relative/page", "#top", "", "javascript:void(0)", "mailto:a@b.com",
        "https://x.org/1", "https://x.org/2", "https://x.org/3", "https://x.org/4",
    ])
    # three links resolve to the page's own host, four to x.org
    assert extract_most_common_link_domain(snap, rules) == "x.org"
    snap2 = make_snapshot(URL, links=["/a", "/b", "https://x.org/"])
    assert extract_most_common_link_domain(snap2, rules) == "shop.example.com"


def test_links_per_occurrence(rules):
    snap = make_snapshot(URL, links=["https://a.com/"] * 3 + ["https://b.com/1", "https://b.com/2"])
    assert extract_most_common_link_domain(snap, rules) == "a.com"


def test_only_fragment_links(rules):
    assert extract_most_common_link_domain(make_snapshot(URL, links=["#", "#x"]), rules) is None


def test_logo(rules):
    snap = make_snapshot(URL, logos=["https://cdn.brand.com/LOGO.svg"],
                         other_imgs=["https://cdn.other.com/a.png", "https://cdn.other.com/b.png"])
    assert extract_logo_domain(snap, rules) == "cdn.brand.com"
    snap2 = make_snapshot(URL, other_imgs=["https://cdn.other.com/a.png"])
    assert extract_logo_domain(snap2, rules) is None
    snap3 = make_snapshot(URL, other_imgs=["/img/brandmark.png"])
    assert extract_logo_domain(snap3, rules, keywords=["brandmark"]) == "shop.example.com"
    with pytest.raises(ValueError):
        extract_logo_domain(snap3, rules, keywords=[])


def test_form_action_longest(rules):
    snap = make_snapshot(URL, forms=["https://a.io/x", "https://login.secure-zz.io/y", "https://b.co/z",
                                     "https://login.secure-aa.io/y"])
    assert extract_form_action_domain(snap, rules) == "login.secure-aa.io"


def test_form_action_empty_means_self(rules):
    snap = _page(b'<form action="" method="post"></form><form method="get"></form>')
    assert extract_form_action_domain(snap, rules) == "shop.example.com"
    assert extract_form_action_domain(_page(b"<form method=post></form>"), rules) is None


def test_no_html(rules):
    snap = make_snapshot(URL, cert_cn="*.example.com", html_body=False)
    ids = extract_all(snap, rules)
    assert ids == IdentifiedDomains(cn="example.com")


def test_html_without_tags(rules):
    ids = extract_all(_page(b"just some text, no markup"), rules)
    assert ids.most_common_link is None and ids.form_action is None
    assert "no HTML elements parsed" in ids.notes


def test_broken_markup_is_tolerated(rules):
    body = b"<html><body><a href='https://ok.com/'>x<a href=https://ok.com/2 <img src=</form><<>>"
    assert extract_all(_page(body), rules).most_common_link == "ok.com"


def test_charsets():
    latin = "<a href='https://café.example/'>x</a>".encode("latin-1")
    assert "é" in decode_html(_page(latin, "text/html; charset=ISO-8859-1"))
    meta = b"<meta charset='latin-1'>" + latin
    assert "é" in decode_html(_page(meta, None))
    assert decode_html(_page(b"\xff<a>", "text/html; charset=bogus-enc")) == "�<a>"


def test_parse_tags_collects_each_kind():
    tags = parse_tags(_page(b"<a href=/a></a><a>no href</a><img src=x.png /><img><form action=/f></form>"))
    assert tags.hrefs == ["/a"]
    assert tags.img_srcs == ["x.png"]
    assert tags.actions == ["/f"]


def test_links_resolve_against_final_url(rules):
    snap = _page(b"<a href='/a'></a><a href='/b'></a>", url="https://www.moved.org/new")
    assert extract_most_common_link_domain(snap, rules) == "moved.org"
