"""Hostname decomposition with public-suffix rules, and domain normalization."""

from __future__ import annotations

import functools
import hashlib
import ipaddress
import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from urllib.parse import urlsplit

log = logging.getLogger(__name__)

PRIVATE_MARKER = "===BEGIN PRIVATE DOMAINS==="
_LABEL = re.compile(r"^[a-z0-9_-]+$")


class DomainError(ValueError):
    pass


class EmptyRuleSet(DomainError):
    pass


class EmptyAfterNormalize(DomainError):
    pass


class UnparseableURL(DomainError):
    pass


class NoRegistrableDomain(DomainError):
    """The host is itself a public suffix (or a bare single label)."""


@dataclass(frozen=True)
class SuffixRules:
    exact_rules: frozenset
    wildcard_rules: frozenset  # stored as "*.ck"
    exception_rules: frozenset  # stored without the "!" ("www.ck")
    source_checksum: str
    skipped: int = 0

    def __len__(self):
        return len(self.exact_rules) + len(self.wildcard_rules) + len(self.exception_rules)

    def public_suffix(self, labels):
        """Number of trailing labels forming the public suffix of ``labels``."""
        n = len(labels)
        # exception rules always prevail; the suffix is the rule minus its leftmost label
        for i in range(n):
            if ".".join(labels[i:]) in self.exception_rules:
                return n - i - 1
        for i in range(n):
            tail = labels[i:]
            if ".".join(tail) in self.exact_rules:
                return n - i
            if len(tail) > 1 and "*." + ".".join(tail[1:]) in self.wildcard_rules:
                return n - i
        return 1  # implicit "*" rule


@dataclass(frozen=True)
class DomainParts:
    subdomain: str
    registrable: str
    suffix: str

    @property
    def root_domain(self):
        return ".".join(p for p in (self.registrable, self.suffix) if p)

    @property
    def full_domain(self):
        return ".".join(p for p in (self.subdomain, self.registrable, self.suffix) if p)


def _to_ascii(label):
    if label.isascii():
        return label.lower()
    return label.encode("idna").decode("ascii").lower()


def load_suffix_rules(path=None, include_private=False):
    """Parse a public-suffix list file.

    ``path`` defaults to the pinned copy shipped with the package. Private-section
    rules (``===BEGIN PRIVATE DOMAINS===`` onwards) are dropped unless
    ``include_private`` is set, which mirrors the ICANN-only default of common
    URL-splitting libraries.
    """
    if path is None:
        raw = resources.files("bdi").joinpath("data/public_suffix_list.dat").read_bytes()
    else:
        raw = Path(path).read_bytes()
    exact, wild, exc = set(), set(), set()
    skipped = 0
    for line in raw.decode("utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("//"):
            if PRIVATE_MARKER in line and not include_private:
                break
            continue
        rule = line.split()[0]
        try:
            if rule.startswith("!"):
                target, body = exc, rule[1:]
            elif rule.startswith("*."):
                target, body = wild, rule[2:]
            else:
                target, body = exact, rule
            labels = [_to_ascii(x) for x in body.split(".")]
        except UnicodeError:
            skipped += 1
            continue
        if not all(_LABEL.match(x) for x in labels):
            skipped += 1
            continue
        body = ".".join(labels)
        target.add("*." + body if target is wild else body)
    if skipped:
        log.warning("skipped %d unrecognised public-suffix lines", skipped)
    if not (exact or wild or exc):
        raise EmptyRuleSet(f"no rules found in {path or 'bundled list'}")
    return SuffixRules(
        frozenset(exact), frozenset(wild), frozenset(exc),
        hashlib.sha256(raw).hexdigest(), skipped,
    )


@functools.lru_cache(maxsize=None)
def default_rules():
    return load_suffix_rules()


def _host_of(url):
    url = url.strip()
    if not url:
        raise UnparseableURL("empty URL")
    if "://" not in url and not url.startswith("//"):
        url = "//" + url
    try:
        parts = urlsplit(url)
        host = parts.hostname
        parts.port  # raises on garbage ports
    except ValueError as e:
        raise UnparseableURL(f"{url!r}: {e}") from None
    if not host:
        raise UnparseableURL(f"no host in {url!r}")
    return host.rstrip(".")


def parse_url_domain(url, rules=None):
    """Split the host of ``url`` into subdomain / registrable label / public suffix."""
    rules = rules or default_rules()
    host = _host_of(url)
    try:
        ipaddress.ip_address(host)
    except ValueError:
        pass
    else:
        return DomainParts("", host.lower(), "")
    try:
        labels = [_to_ascii(x) for x in host.split(".")]
    except UnicodeError:
        raise UnparseableURL(f"bad IDN host {host!r}") from None
    if not all(_LABEL.match(x) for x in labels):
        raise UnparseableURL(f"invalid host {host!r}")
    k = rules.public_suffix(labels)
    if k >= len(labels):
        raise NoRegistrableDomain(host)
    cut = len(labels) - k
    return DomainParts(".".join(labels[: cut - 1]), labels[cut - 1], ".".join(labels[cut:]))


def _strip_once(s):
    s = s.strip().lower()
    for prefix in ("*.", ".", "www."):
        if s.startswith(prefix):
            s = s[len(prefix):]
    return s.strip()


def normalize_domain(raw):
    """Lowercase and drop one leading ``*.``, ``.`` and ``www.`` (in that order).

    The pass repeats until nothing changes so that the function is idempotent on
    stacked prefixes such as ``www.www.a.com``.
    """
    s = _strip_once(raw)
    while (t := _strip_once(s)) != s:
        s = t
    if not s:
        raise EmptyAfterNormalize(repr(raw))
    return s


def domains_match(candidate, parts):
    c = candidate.lower()
    return c == parts.full_domain or c == parts.root_domain
