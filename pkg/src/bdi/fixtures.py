"""Hand-built page snapshots: the facebook walkthrough and a small labeled corpus."""

from __future__ import annotations

import html
from datetime import datetime, timezone

import numpy as np

from .encode import FEATURE_NAMES
from .snapshot import PageSnapshot
from .synthetic import LEGIT_PROBS, PHISH_PROBS

EPOCH = datetime(2025, 1, 1, tzinfo=timezone.utc)
BRANDS = ("paypal.com", "microsoft.com", "apple.com", "amazon.com", "netflix.com", "chase.com")


def page_html(links=(), logos=(), forms=(), other_imgs=()):
    """A small HTML document with the given anchor hrefs, logo srcs and form actions."""
    e = html.escape
    parts = ["<!DOCTYPE html><html><head><title>fixture</title></head><body>"]
    parts += [f'<img src="{e(s)}" alt="logo">' for s in logos]
    parts += [f'<img src="{e(s)}">' for s in other_imgs]
    parts += [f'<a href="{e(h)}">link {i}</a>' for i, h in enumerate(links)]
    parts += [f'<form action="{e(a)}" method="post"><input name="u"></form>' for a in forms]
    parts.append("</body></html>")
    return "\n".join(parts).encode("utf-8")


def make_snapshot(url, cert_cn=None, cookie_domains=(), links=(), logos=(), forms=(),
                  other_imgs=(), fetched_at=EPOCH, html_body=True):
    body = page_html(links, logos, forms, other_imgs) if html_body else None
    return PageSnapshot(
        requested_url=url,
        final_url=url,
        fetched_at=fetched_at,
        status_code=200 if body is not None else 0,
        cert_cn=cert_cn,
        cookie_domains=tuple(cookie_domains),
        html=body,
        content_type="text/html; charset=utf-8" if body is not None else None,
    )


def walkthrough_snapshot(cn="*.facebook.com"):
    """www.facebook.com as a legitimate page: every source points back at facebook.com."""
    return make_snapshot(
        "https://www.facebook.com/",
        cert_cn=cn,
        cookie_domains=(".facebook.com", ".facebook.com"),
        links=["https://www.facebook.com/login", "https://www.facebook.com/help",
               "/privacy", "https://facebook.com/about", "https://developers.facebook.com/"],
        logos=["/images/fb_logo.png"],
        forms=["https://www.facebook.com/login/device-based/regular/login/"],
    )


def _evidence(code, own, brand):
    """Hosts realizing a ternary code for one feature."""
    if code == 0:
        return None
    return own if code == 1 else brand


def page_from_codes(codes, own_host, brand, index=0, fetched_at=EPOCH):
    """A snapshot whose extracted features encode to ``codes`` (dict feature -> code)."""
    own_root = own_host.split(".", 1)[1] if own_host.startswith("www.") else own_host
    pick = {f: _evidence(codes[f], own_root, brand) for f in FEATURE_NAMES}
    url = f"https://{own_host}/p{index}"
    links = []
    if pick["MCLD"]:
        links = [f"https://{pick['MCLD']}/a{i}" for i in range(3)] + ["#top", "mailto:x@y.org"]
    logos = [f"https://static.{pick['LD']}/img/logo.png"] if pick["LD"] else []
    if pick["LD"] == own_root:
        logos = ["/img/logo.png"]
    forms = [f"https://{pick['FAD']}/signin"] if pick["FAD"] else []
    cookies = [f".{pick['CD']}"] if pick["CD"] else []
    return make_snapshot(
        url,
        cert_cn=f"*.{pick['CN']}" if pick["CN"] else None,
        cookie_domains=cookies,
        links=links,
        logos=logos,
        forms=forms,
        other_imgs=["/img/banner.jpg"],
        fetched_at=fetched_at,
    )


def fixture_corpus(n=40, seed=7, phishing_fraction=0.5):
    """``n`` labeled snapshots with codes drawn from the synthetic class distributions.

    Returns a list of ``(snapshot, label, codes)``; ``codes`` is what the
    extraction/encoding pipeline should reproduce.
    """
    rng = np.random.default_rng(seed)
    n_t = int(round(n * phishing_fraction))
    out = []
    for i in range(n):
        label = "T" if i < n_t else "F"
        probs = PHISH_PROBS if label == "T" else LEGIT_PROBS
        codes = {f: int(rng.choice([-1, 0, 1], p=probs)) for f in FEATURE_NAMES}
        host = f"www.site{i:03d}.com" if label == "F" else f"login-secure-{i:03d}.net"
        brand = BRANDS[i % len(BRANDS)]
        out.append((page_from_codes(codes, host, brand, i), label, codes))
    return out


DEMO_SEED = 2025


def train_demo_model(n=10000, n_trees=25, seed=DEMO_SEED):
    """The forest shipped as ``data/demo_model.json``: synthetic data, all five features."""
    from .learn import train_random_forest
    from .synthetic import generate

    return train_random_forest(generate(n, seed=seed), FEATURE_NAMES, n_trees=n_trees, seed=seed)
