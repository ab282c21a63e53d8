import json
import socket
from datetime import datetime, timezone

import pytest

from bdi.fixtures import make_snapshot, walkthrough_snapshot
from bdi.snapshot import (ConnectFailed, FetchNote, FetchPolicy, MalformedSnapshot, PageSnapshot,
                          cookie_domain, fetch_batch, fetch_snapshot, iter_snapshot_files,
                          load_snapshot, promote_url, save_snapshot, snapshot_filename,
                          snapshot_from_dict, snapshot_to_dict)

PIN = {"www.facebook.com": "127.0.0.1", "facebook.com": "127.0.0.1", "m.facebook.com": "127.0.0.1"}


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


# -- data model ---------------------------------------------------------------

def test_snapshot_validation():
    now = datetime.now(timezone.utc)
    with pytest.raises(ValueError):
        PageSnapshot("x", "/relative", now)
    with pytest.raises(ValueError):
        PageSnapshot("x", "http://a.com/", datetime(2025, 1, 1))
    with pytest.raises(ValueError):
        PageSnapshot("x", "http://a.com/", now, status_code=0, html=b"<p>")


def test_policy_validation():
    with pytest.raises(ValueError):
        FetchPolicy(total_timeout=0)
    with pytest.raises(ValueError):
        FetchPolicy(max_redirects=-1)


def test_promote_url():
    assert promote_url("example.com") == "https://example.com"
    assert promote_url("  http://a.com/x ") == "http://a.com/x"
    with pytest.raises(ValueError):
        promote_url("ftp://a.com/")


@pytest.mark.parametrize("header,expected", [
    ("a=1; Domain=.facebook.com; Path=/", ".facebook.com"),
    ("a=1; path=/; domain=example.org; Secure", "example.org"),
    ("a=1; Path=/", "www.host.com"),
    ("a=1; Domain=", "www.host.com"),
])
def test_cookie_domain(header, expected):
    assert cookie_domain(header, "www.host.com") == expected


# -- store -------------------------------------------------------------------

def test_round_trip(tmp_path):
    snap = walkthrough_snapshot()
    snap = PageSnapshot(**{**snap.__dict__, "fetch_errors": (FetchNote("tls", "x"),)})
    path = save_snapshot(snap, tmp_path)
    assert path.name == snapshot_filename(snap)
    assert load_snapshot(path) == snap


def test_round_trip_of_failed_fetch(tmp_path):
    snap = make_snapshot("https://gone.example/", html_body=False)
    assert load_snapshot(save_snapshot(snap, tmp_path)) == snap


def test_stored_form(tmp_path):
    d = json.loads(save_snapshot(walkthrough_snapshot(), tmp_path).read_text())
    for key in ("requested_url", "final_url", "fetched_at", "status_code", "cert_cn",
                "cookie_domains", "html_b64", "fetch_errors"):
        assert key in d
    assert d["fetched_at"] == "2025-01-01T00:00:00.000000Z"


def test_filename_is_content_addressed():
    a = walkthrough_snapshot()
    b = walkthrough_snapshot(cn="github.com")
    assert snapshot_filename(a) == snapshot_filename(b)
    later = make_snapshot(a.requested_url, fetched_at=datetime(2025, 1, 2, tzinfo=timezone.utc))
    assert snapshot_filename(later) != snapshot_filename(a)
    assert len(snapshot_filename(a)) == 32 + len(".json")


def test_unknown_keys_ignored():
    d = snapshot_to_dict(walkthrough_snapshot())
    d["future_field"] = [1, 2, 3]
    del d["content_type"]
    snap = snapshot_from_dict(d)
    assert snap.cert_cn == "*.facebook.com"
    assert snap.content_type is None


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("final_url"),
    lambda d: d.update(fetched_at="yesterday"),
    lambda d: d.update(fetched_at="2025-01-01T00:00:00"),
    lambda d: d.update(html_b64="not base64!"),
    lambda d: d.update(status_code="abc"),
    lambda d: d.update(cookie_domains=[1]),
    lambda d: d.update(fetch_errors=[{"stage": "x"}]),
])
def test_malformed_records(mutate):
    d = snapshot_to_dict(walkthrough_snapshot())
    mutate(d)
    with pytest.raises(MalformedSnapshot):
        snapshot_from_dict(d)


def test_malformed_files(tmp_path):
    (tmp_path / "a.json").write_text("{not json")
    (tmp_path / "b.json").write_text("[1, 2]")
    (tmp_path / "c.json").write_bytes(b"\xff\xfe")
    for p in iter_snapshot_files(tmp_path):
        with pytest.raises(MalformedSnapshot):
            load_snapshot(p)


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        save_snapshot(walkthrough_snapshot(), blocker)


def test_missing_directory(tmp_path):
    with pytest.raises(OSError):
        save_snapshot(walkthrough_snapshot(), tmp_path / "nope")


def test_iter_snapshot_files(tmp_path):
    p = save_snapshot(walkthrough_snapshot(), tmp_path)
    (tmp_path / "notes.txt").write_text("x")
    assert iter_snapshot_files(tmp_path) == [p]
    assert iter_snapshot_files(p) == [p]


# -- live fetching against local stub servers ------------------------------------

PAGE = b"<html><body><a href='/x'>x</a></body></html>"


def test_https_fetch_reads_cn_and_cookies(stub_server):
    srv = stub_server({"/": (200, [("Content-Type", "text/html"),
                                   ("Set-Cookie", "a=1; Domain=.facebook.com"),
                                   ("Set-Cookie", "b=2; Path=/")], PAGE)},
                      common_name="*.facebook.com")
    snap = fetch_snapshot(srv.url("www.facebook.com"), FetchPolicy(resolve=PIN))
    assert snap.status_code == 200
    assert snap.cert_cn == "*.facebook.com"
    assert snap.cookie_domains == (".facebook.com", "www.facebook.com")
    assert snap.html == PAGE
    assert snap.content_type == "text/html"
    assert snap.fetch_errors == ()
    assert snap.fetched_at.tzinfo is not None


def test_redirects_followed_and_cookies_kept(stub_server):
    srv = stub_server({
        "/": (301, [("Location", "/step"), ("Set-Cookie", "a=1; Domain=.facebook.com")], b""),
        "/step": (302, [("Location", "/final?x=1")], b""),
        "/final?x=1": (200, [("Set-Cookie", "c=3; Domain=m.facebook.com")], PAGE),
    }, common_name="facebook.com")
    snap = fetch_snapshot(srv.url("www.facebook.com"), FetchPolicy(resolve=PIN))
    assert snap.final_url == srv.url("www.facebook.com", "/final?x=1")
    assert snap.requested_url == srv.url("www.facebook.com")
    assert snap.cookie_domains == (".facebook.com", "m.facebook.com")
    assert snap.cert_cn == "facebook.com"


def test_redirect_loop_is_noted(stub_server):
    srv = stub_server({"/a": (302, [("Location", "/b")], b""), "/b": (302, [("Location", "/a")], b"")})
    snap = fetch_snapshot(srv.url("www.facebook.com", "/a"), FetchPolicy(resolve=PIN))
    stages = [n.stage for n in snap.fetch_errors]
    assert "redirect" in stages
    assert snap.status_code == 302


def test_redirect_limit(stub_server):
    routes = {f"/{i}": (302, [("Location", f"/{i + 1}")], b"") for i in range(20)}
    srv = stub_server(routes)
    snap = fetch_snapshot(srv.url("www.facebook.com", "/0"), FetchPolicy(resolve=PIN, max_redirects=3))
    assert snap.final_url.endswith("/3")
    assert any("more than 3" in n.message for n in snap.fetch_errors)


def test_plain_http_notes_missing_tls(stub_server):
    srv = stub_server({"/": (200, [], PAGE)})
    snap = fetch_snapshot(srv.url("www.facebook.com"), FetchPolicy(resolve=PIN))
    assert snap.cert_cn is None
    assert [n.stage for n in snap.fetch_errors] == ["tls"]


def test_body_truncation(stub_server):
    srv = stub_server({"/": (200, [], b"x" * 5000)})
    snap = fetch_snapshot(srv.url("www.facebook.com"), FetchPolicy(resolve=PIN, max_body_bytes=1000))
    assert len(snap.html) == 1000
    assert "body" in [n.stage for n in snap.fetch_errors]


def test_error_status_is_kept(stub_server):
    srv = stub_server({})
    snap = fetch_snapshot(srv.url("www.facebook.com", "/missing"), FetchPolicy(resolve=PIN))
    assert snap.status_code == 404


def test_connection_refused():
    port = _free_port()
    with pytest.raises(ConnectFailed) as info:
        fetch_snapshot(f"http://www.facebook.com:{port}/", FetchPolicy(resolve=PIN, connect_timeout=2))
    assert info.value.stage == "connect"


def test_batch_order_and_isolation(stub_server):
    srv = stub_server({f"/{i}": (200, [], f"<p>{i}</p>".encode()) for i in range(6)})
    dead = f"http://www.facebook.com:{_free_port()}/"
    urls = [srv.url("www.facebook.com", f"/{i}") for i in range(3)] + [dead] + \
           [srv.url("www.facebook.com", f"/{i}") for i in range(3, 6)]
    snaps = fetch_batch(urls, FetchPolicy(resolve=PIN, connect_timeout=2), parallelism=3)
    assert [s.requested_url for s in snaps] == urls
    assert snaps[3].status_code == 0 and snaps[3].html is None
    assert snaps[3].fetch_errors[0].stage == "connect"
    ok = [s for i, s in enumerate(snaps) if i != 3]
    assert [s.html for s in ok] == [f"<p>{i}</p>".encode() for i in range(6)]


def test_batch_edge_cases():
    assert fetch_batch([]) == []
    with pytest.raises(ValueError):
        fetch_batch(["http://a.com/"], parallelism=0)


def test_batch_bad_url_becomes_error_snapshot():
    [snap] = fetch_batch(["ftp://nope.example/"])
    assert snap.status_code == 0
    assert snap.fetch_errors
