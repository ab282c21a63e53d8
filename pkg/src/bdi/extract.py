"""Identify the five candidate brand domains of a page snapshot."""

from __future__ import annotations

import codecs
import logging
import re
from collections import Counter
from dataclasses import dataclass
from html.parser import HTMLParser
from urllib.parse import urljoin, urlsplit

from .domains import DomainError, default_rules, normalize_domain, parse_url_domain

log = logging.getLogger(__name__)

DEFAULT_LOGO_KEYWORDS = ("logo",)
_UNSET = object()
_HOSTNAME = re.compile(r"^[a-z0-9_-]+(\.[a-z0-9_-]+)*$")
_META_CHARSET = re.compile(rb"""<meta[^>]+charset\s*=\s*["']?\s*([A-Za-z0-9._:-]+)""", re.I)


@dataclass(frozen=True)
class IdentifiedDomains:
    cn: str | None = None
    cookie: str | None = None
    most_common_link: str | None = None
    logo: str | None = None
    form_action: str | None = None
    notes: tuple = ()


class _TagCollector(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.n_tags = 0
        self.hrefs, self.img_srcs, self.actions = [], [], []

    def handle_starttag(self, tag, attrs):
        self.n_tags += 1
        attrs = dict(attrs)
        if tag == "a" and attrs.get("href") is not None:
            self.hrefs.append(attrs["href"])
        elif tag == "img" and attrs.get("src") is not None:
            self.img_srcs.append(attrs["src"])
        elif tag == "form" and "action" in attrs:
            self.actions.append(attrs["action"] or "")

    handle_startendtag = handle_starttag


def _charset(content_type):
    if not content_type:
        return None
    m = re.search(r"charset\s*=\s*[\"']?([^\s;\"']+)", content_type, re.I)
    return m.group(1) if m else None


def decode_html(snap):
    """Body text per declared charset (header, then <meta>), else UTF-8 with replacement."""
    if snap.html is None:
        return None
    candidates = [_charset(snap.content_type)]
    m = _META_CHARSET.search(snap.html[:4096])
    if m:
        candidates.append(m.group(1).decode("ascii"))
    for name in candidates:
        if not name:
            continue
        try:
            codecs.lookup(name)
        except LookupError:
            continue
        return snap.html.decode(name, errors="replace")
    return snap.html.decode("utf-8", errors="replace")


def parse_tags(snap):
    """Collected tags, or None when there is no usable HTML."""
    text = decode_html(snap)
    if not text:
        return None
    p = _TagCollector()
    try:
        p.feed(text)
        p.close()
    except AssertionError:  # very old parser edge cases on broken markup
        pass
    return p if p.n_tags else None


def _ref_domain(ref, base, rules):
    """Normalized full domain of ``ref`` resolved against ``base``; None if not http(s)."""
    ref = ref.strip()
    try:
        absolute = urljoin(base, ref)
        if urlsplit(absolute).scheme.lower() not in ("http", "https"):
            return None
        return normalize_domain(parse_url_domain(absolute, rules).full_domain)
    except (DomainError, ValueError):
        return None


def _most_common(domains):
    counts = Counter(d for d in domains if d)
    if not counts:
        return None
    return min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def _clean(raw):
    try:
        d = normalize_domain(raw)
    except DomainError:
        return None
    return d if _HOSTNAME.match(d) else None


def extract_cn(snap):
    if snap.cert_cn is None:
        return None
    d = _clean(snap.cert_cn)
    if d is None:
        log.debug("certificate CN %r is not a domain", snap.cert_cn)
    return d


def extract_cookie_domain(snap):
    return _most_common(_clean(c) for c in snap.cookie_domains)


def extract_most_common_link_domain(snap, rules=None, tags=_UNSET):
    if tags is _UNSET:
        tags = parse_tags(snap)
    if tags is None:
        return None
    rules = rules or default_rules()
    refs = (h for h in tags.hrefs if h.strip() and not h.strip().startswith("#"))
    return _most_common(_ref_domain(h, snap.final_url, rules) for h in refs)


def extract_logo_domain(snap, rules=None, keywords=DEFAULT_LOGO_KEYWORDS, tags=_UNSET):
    keywords = [k.lower() for k in keywords if k]
    if not keywords:
        raise ValueError("at least one logo keyword is required")
    if tags is _UNSET:
        tags = parse_tags(snap)
    if tags is None:
        return None
    rules = rules or default_rules()
    srcs = (s for s in tags.img_srcs if any(k in s.lower() for k in keywords))
    return _most_common(_ref_domain(s, snap.final_url, rules) for s in srcs)


def extract_form_action_domain(snap, rules=None, tags=_UNSET):
    """Longest (by characters) action domain; ties go to the lexicographically smallest."""
    if tags is _UNSET:
        tags = parse_tags(snap)
    if tags is None:
        return None
    rules = rules or default_rules()
    found = {_ref_domain(a, snap.final_url, rules) for a in tags.actions} - {None}
    if not found:
        return None
    return min(found, key=lambda d: (-len(d), d))


def extract_all(snap, rules=None, keywords=DEFAULT_LOGO_KEYWORDS):
    rules = rules or default_rules()
    tags = parse_tags(snap)
    notes = []
    cn = extract_cn(snap)
    if snap.cert_cn is not None and cn is None:
        notes.append(f"certificate CN {snap.cert_cn!r} is not domain-shaped")
    if snap.html is not None and tags is None:
        notes.append("no HTML elements parsed")
    return IdentifiedDomains(
        cn=cn,
        cookie=extract_cookie_domain(snap),
        most_common_link=extract_most_common_link_domain(snap, rules, tags),
        logo=extract_logo_domain(snap, rules, keywords, tags),
        form_action=extract_form_action_domain(snap, rules, tags),
        notes=tuple(notes),
    )
