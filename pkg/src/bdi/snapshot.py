"""Network acquisition of page observations and their offline JSON store."""

from __future__ import annotations

import base64
import binascii
import hashlib
import http.client
import json
import logging
import socket
import ssl
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urljoin, urlsplit

from cryptography import x509
from cryptography.x509.oid import NameOID

log = logging.getLogger(__name__)

DEFAULT_USER_AGENT = (
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 "
    "(KHTML, like Gecko) Chrome/124.0.0.0 Safari/537.36"
)
REDIRECT_CODES = {301, 302, 303, 307, 308}


class FetchError(Exception):
    """Nothing at all could be captured for a URL."""

    stage = "fetch"


class DNSFailure(FetchError):
    stage = "dns"


class ConnectTimeout(FetchError):
    stage = "connect"


class ConnectFailed(FetchError):
    stage = "connect"


class TLSFailure(FetchError):
    stage = "tls"


class MalformedSnapshot(ValueError):
    pass


@dataclass(frozen=True)
class FetchNote:
    stage: str
    message: str


@dataclass(frozen=True)
class FetchPolicy:
    connect_timeout: float = 10.0
    total_timeout: float = 30.0
    max_redirects: int = 10
    max_body_bytes: int = 5 * 1024 * 1024
    user_agent: str = DEFAULT_USER_AGENT
    verify_tls: bool = False
    # host -> IP overrides, like curl --resolve; lets tests pin names to a local server
    resolve: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.connect_timeout <= 0 or self.total_timeout <= 0:
            raise ValueError("timeouts must be positive")
        if self.max_redirects < 0:
            raise ValueError("max_redirects must be >= 0")
        if self.max_body_bytes < 0:
            raise ValueError("max_body_bytes must be >= 0")


@dataclass(frozen=True)
class PageSnapshot:
    requested_url: str
    final_url: str
    fetched_at: datetime
    status_code: int = 0
    cert_cn: str | None = None
    cookie_domains: tuple = ()
    html: bytes | None = None
    fetch_errors: tuple = ()
    content_type: str | None = None

    def __post_init__(self):
        if not urlsplit(self.final_url).scheme:
            raise ValueError(f"final_url must be absolute: {self.final_url!r}")
        if self.fetched_at.tzinfo is None:
            raise ValueError("fetched_at must be timezone-aware")
        if self.html is not None and not self.status_code:
            raise ValueError("html present without a status code")


def promote_url(url):
    url = url.strip()
    if "://" not in url:
        url = "https://" + url.lstrip("/")
    scheme = urlsplit(url).scheme.lower()
    if scheme not in ("http", "https"):
        raise ValueError(f"unsupported scheme in {url!r}")
    return url


def cookie_domain(header, host):
    """Domain attribute of one Set-Cookie header; host-only cookies map to ``host``."""
    for attr in header.split(";")[1:]:
        name, _, value = attr.partition("=")
        if name.strip().lower() == "domain" and value.strip():
            return value.strip()
    return host


def leaf_common_name(der):
    cert = x509.load_der_x509_certificate(der)
    attrs = cert.subject.get_attributes_for_oid(NameOID.COMMON_NAME)
    return attrs[0].value if attrs else None


def _tls_context(verify):
    if verify:
        return ssl.create_default_context()
    ctx = ssl.SSLContext(ssl.PROTOCOL_TLS_CLIENT)
    ctx.check_hostname = False
    ctx.verify_mode = ssl.CERT_NONE
    return ctx


def _connection(url, policy):
    parts = urlsplit(url)
    host = parts.hostname
    if not host:
        raise ValueError(f"no host in {url!r}")
    if parts.scheme == "https":
        conn = http.client.HTTPSConnection(
            host, parts.port, timeout=policy.connect_timeout,
            context=_tls_context(policy.verify_tls),
        )
    else:
        conn = http.client.HTTPConnection(host, parts.port, timeout=policy.connect_timeout)
    pinned = policy.resolve.get(host)
    if pinned:
        def create(address, timeout, source_address=None):
            return socket.create_connection((pinned, address[1]), timeout, source_address)
        conn._create_connection = create
    return conn


def _classify(exc):
    if isinstance(exc, socket.gaierror):
        return DNSFailure
    if isinstance(exc, (socket.timeout, TimeoutError)):
        return ConnectTimeout
    if isinstance(exc, ssl.SSLError):
        return TLSFailure
    return ConnectFailed


def _request(url, policy, deadline):
    """One hop. Returns (response, body, truncated, cert_der)."""
    conn = _connection(url, policy)
    parts = urlsplit(url)
    path = parts.path or "/"
    if parts.query:
        path += "?" + parts.query
    try:
        conn.connect()
    except (OSError, ssl.SSLError) as e:
        conn.close()
        raise _classify(e)(f"{url}: {e}") from e
    try:
        der = conn.sock.getpeercert(binary_form=True) if parts.scheme == "https" else None
        conn.sock.settimeout(max(0.01, deadline - time.monotonic()))
        conn.request("GET", path, headers={
            "User-Agent": policy.user_agent,
            "Accept": "text/html,application/xhtml+xml,*/*;q=0.8",
            "Accept-Encoding": "identity",
            "Connection": "close",
        })
        resp = conn.getresponse()
        body = resp.read(policy.max_body_bytes + 1)
    finally:
        conn.close()
    truncated = len(body) > policy.max_body_bytes
    return resp, body[: policy.max_body_bytes], truncated, der


def fetch_snapshot(url, policy=None):
    """Fetch ``url`` following redirects and record CN, cookies and body.

    Raises a :class:`FetchError` subclass only if the very first connection
    fails; later problems are kept in ``fetch_errors``.
    """
    policy = policy or FetchPolicy()
    requested = url
    url = promote_url(url)
    fetched_at = datetime.now(timezone.utc)
    deadline = time.monotonic() + policy.total_timeout
    notes, cookies = [], []
    final = None  # (url, response, body, der)
    seen = set()
    current = url
    for hop in range(policy.max_redirects + 1):
        try:
            resp, body, truncated, der = _request(current, policy, deadline)
        except FetchError as e:
            if final is None:
                raise
            notes.append(FetchNote(e.stage, str(e)))
            break
        except (OSError, http.client.HTTPException) as e:
            if final is None:
                raise ConnectFailed(f"{current}: {e}") from e
            notes.append(FetchNote("http", f"{current}: {e}"))
            break
        host = urlsplit(current).hostname
        cookies.extend(cookie_domain(h, host) for h in resp.msg.get_all("Set-Cookie") or ())
        if truncated:
            notes.append(FetchNote("body", f"truncated at {policy.max_body_bytes} bytes"))
        final = (current, resp, body, der)
        location = resp.getheader("Location")
        if resp.status not in REDIRECT_CODES or not location:
            break
        seen.add(current)
        nxt = urljoin(current, location.strip())
        if urlsplit(nxt).scheme not in ("http", "https"):
            notes.append(FetchNote("redirect", f"non-http redirect target {nxt!r}"))
            break
        if nxt in seen:
            notes.append(FetchNote("redirect", f"redirect loop at {nxt}"))
            break
        if hop == policy.max_redirects:
            notes.append(FetchNote("redirect", f"more than {policy.max_redirects} redirects"))
            break
        if time.monotonic() > deadline:
            notes.append(FetchNote("timeout", "total timeout exceeded"))
            break
        current = nxt

    final_url, resp, body, der = final
    cn = None
    if der is None:
        notes.append(FetchNote("tls", "no TLS on final hop"))
    else:
        try:
            cn = leaf_common_name(der)
        except ValueError as e:
            notes.append(FetchNote("tls", f"unparseable certificate: {e}"))
        if cn is None:
            notes.append(FetchNote("tls", "certificate subject has no CN"))
    return PageSnapshot(
        requested_url=requested,
        final_url=final_url,
        fetched_at=fetched_at,
        status_code=resp.status,
        cert_cn=cn,
        cookie_domains=tuple(cookies),
        html=body,
        fetch_errors=tuple(notes),
        content_type=resp.getheader("Content-Type"),
    )


def error_snapshot(url, exc):
    try:
        final = promote_url(url)
    except ValueError:
        final = "http://invalid/"
    return PageSnapshot(
        requested_url=url,
        final_url=final,
        fetched_at=datetime.now(timezone.utc),
        fetch_errors=(FetchNote(getattr(exc, "stage", "fetch"), str(exc)),),
    )


def fetch_batch(urls, policy=None, parallelism=8):
    """Fetch every URL with at most ``parallelism`` in flight; order is preserved."""
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    policy = policy or FetchPolicy()

    def one(u):
        try:
            return fetch_snapshot(u, policy)
        except (FetchError, ValueError) as e:
            log.info("fetch failed for %s: %s", u, e)
            return error_snapshot(u, e)

    urls = list(urls)
    if not urls:
        return []
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(one, urls))


# -- offline store -----------------------------------------------------------

def _format_time(dt):
    return dt.astimezone(timezone.utc).isoformat(timespec="microseconds").replace("+00:00", "Z")


def _parse_time(s):
    if s.endswith("Z"):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        raise ValueError("timestamp lacks a UTC offset")
    return dt


def snapshot_to_dict(snap):
    return {
        "requested_url": snap.requested_url,
        "final_url": snap.final_url,
        "fetched_at": _format_time(snap.fetched_at),
        "status_code": snap.status_code,
        "cert_cn": snap.cert_cn,
        "cookie_domains": list(snap.cookie_domains),
        "html_b64": None if snap.html is None else base64.b64encode(snap.html).decode("ascii"),
        "fetch_errors": [{"stage": n.stage, "message": n.message} for n in snap.fetch_errors],
        "content_type": snap.content_type,
    }


def snapshot_from_dict(d):
    try:
        html = d["html_b64"]
        snap = PageSnapshot(
            requested_url=_str(d["requested_url"]),
            final_url=_str(d["final_url"]),
            fetched_at=_parse_time(d["fetched_at"]),
            status_code=int(d["status_code"]),
            cert_cn=None if d["cert_cn"] is None else _str(d["cert_cn"]),
            cookie_domains=tuple(_str(c) for c in d["cookie_domains"]),
            html=None if html is None else base64.b64decode(html, validate=True),
            fetch_errors=tuple(FetchNote(_str(e["stage"]), _str(e["message"]))
                               for e in d["fetch_errors"]),
            content_type=d.get("content_type"),
        )
    except KeyError as e:
        raise MalformedSnapshot(f"missing field {e}") from None
    except (TypeError, ValueError, binascii.Error) as e:
        raise MalformedSnapshot(str(e)) from None
    return snap


def _str(v):
    if not isinstance(v, str):
        raise TypeError(f"expected string, got {type(v).__name__}")
    return v


def snapshot_filename(snap):
    key = f"{snap.requested_url}\n{_format_time(snap.fetched_at)}".encode("utf-8")
    return hashlib.sha256(key).hexdigest()[:32] + ".json"


def save_snapshot(snap, directory):
    path = Path(directory) / snapshot_filename(snap)
    text = json.dumps(snapshot_to_dict(snap), indent=1, sort_keys=True)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def load_snapshot(path):
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise MalformedSnapshot(f"{path}: {e}") from None
    if not isinstance(d, dict):
        raise MalformedSnapshot(f"{path}: not a JSON object")
    return snapshot_from_dict(d)


def iter_snapshot_files(path):
    path = Path(path)
    if path.is_dir():
        return sorted(path.glob("*.json"))
    return [path]
