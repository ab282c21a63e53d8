"""``bdi`` command line: snapshot, extract, rank, train, evaluate, sweep, scan."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import learn
from .domains import load_suffix_rules, parse_url_domain, DomainError
from .encode import FEATURE_NAMES, build_dataset, encode_vector, read_feature_csv, write_feature_csv
from .extract import DEFAULT_LOGO_KEYWORDS, extract_all
from .scanner import ScanFailed, load_demo_model, scan, scan_offline
from .select import format_report, rank_report, write_ranking_json
from .snapshot import (FetchPolicy, MalformedSnapshot, fetch_batch, iter_snapshot_files,
                       load_snapshot, save_snapshot)

EXIT_LEGIT, EXIT_ERROR, EXIT_PHISHING = 0, 1, 3
log = logging.getLogger("bdi")


def _csv_list(s):
    return [x.strip() for x in s.split(",") if x.strip()]


def _rules(args):
    return load_suffix_rules(args.psl) if args.psl else load_suffix_rules()


def cmd_snapshot(args):
    policy = FetchPolicy(connect_timeout=min(args.timeout, 10.0), total_timeout=args.timeout,
                         verify_tls=args.verify_tls)
    snaps = fetch_batch(args.urls, policy, args.parallel)
    failed = 0
    for s in snaps:
        path = save_snapshot(s, args.out)
        status = "ok" if s.status_code else "FAILED"
        failed += not s.status_code
        print(f"{status}\t{s.requested_url}\t{path}")
    return EXIT_ERROR if failed == len(snaps) and snaps else 0


def cmd_extract(args):
    rules = _rules(args)
    keywords = _csv_list(args.logo_keywords)
    rows = []
    for path in iter_snapshot_files(args.snapshots):
        try:
            snap = load_snapshot(path)
            parts = parse_url_domain(snap.final_url, rules)
        except (MalformedSnapshot, DomainError) as e:
            log.warning("skipping %s: %s", path, e)
            continue
        ids = extract_all(snap, rules, keywords)
        rows.append(encode_vector(ids, parts, args.label, snap.final_url))
    ds = build_dataset(rows, args.min_present)
    write_feature_csv(ds, args.out)
    print(f"wrote {len(ds)} rows to {args.out} ({ds.provenance})")
    return 0


def cmd_rank(args):
    ds = read_feature_csv(args.data)
    report = rank_report(ds, relieff_k=args.relieff_k, seed=args.seed)
    print(format_report(report))
    if args.out:
        write_ranking_json(report, args.out)
    return 0


def cmd_train(args):
    ds = read_feature_csv(args.data)
    hyper = {}
    if args.n_trees is not None:
        hyper["n_trees"] = args.n_trees
    model = learn.train(args.model, ds, _csv_list(args.features), seed=args.seed, **hyper)
    learn.save_model(model, args.out)
    print(f"saved {model.kind} on {'+'.join(model.feature_subset)} to {args.out} "
          f"(id {learn.model_id(model)})")
    return 0


def cmd_evaluate(args):
    ds = read_feature_csv(args.data)
    model = learn.load_model(args.model_file)
    hyper = dict(model.parameters["hyper"])
    report = learn.evaluate(ds, model.kind, model.feature_subset, args.protocol,
                            seed=args.seed, **hyper)
    print(json.dumps({"kind": model.kind, "subset": list(model.feature_subset),
                      "protocol": args.protocol, **report.as_dict()}, indent=2))
    return 0


def cmd_sweep(args):
    ds = read_feature_csv(args.data)
    report = learn.sweep_combinations(ds, _csv_list(args.models), args.protocol, seed=args.seed)
    print(report.summary())
    if args.out:
        report.write_csv(args.out, timing=not args.no_timing)
    return 0


def cmd_scan(args):
    model = learn.load_model(args.model_file) if args.model_file else load_demo_model()
    rules = _rules(args)
    try:
        if args.offline:
            result = scan_offline(args.target, model, rules)
        else:
            policy = FetchPolicy(total_timeout=args.timeout, verify_tls=args.verify_tls)
            result = scan(args.target, model, policy, rules)
    except ScanFailed as e:
        print(f"scan failed at {e.stage}: {e.detail}", file=sys.stderr)
        return EXIT_ERROR
    if args.json:
        print(json.dumps(result.to_dict(), indent=2))
    else:
        print(f"{result.url}: {'PHISHING' if result.verdict == 'T' else 'legitimate'} "
              f"(root domain {result.parts.root_domain}, model {result.model_id})")
        for f in FEATURE_NAMES:
            e = result.per_feature_explanation[f]
            print(f"  {f:<5} {e['code']:>2}  {e['status']:<8} {e['identified'] or '-'}")
        if result.insufficient_evidence:
            print("  (insufficient evidence: three or more features absent)")
    return EXIT_PHISHING if result.verdict == "T" else EXIT_LEGIT


def _tls_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--insecure-tls", dest="verify_tls", action="store_false",
                   help="do not verify certificates (default)")
    g.add_argument("--verify-tls", dest="verify_tls", action="store_true",
                   help="require a valid certificate chain")
    p.set_defaults(verify_tls=False)


def build_parser():
    ap = argparse.ArgumentParser(prog="bdi", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("snapshot", help="fetch URLs and store offline snapshots")
    p.add_argument("urls", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--parallel", type=int, default=8)
    p.add_argument("--timeout", type=float, default=30.0, help="total seconds per URL")
    _tls_flags(p)
    p.set_defaults(func=cmd_snapshot)

    p = sub.add_parser("extract", help="snapshots -> feature CSV")
    p.add_argument("snapshots", help="snapshot file or directory of *.json")
    p.add_argument("--psl", help="public suffix list file (default: bundled copy)")
    p.add_argument("--logo-keywords", default=",".join(DEFAULT_LOGO_KEYWORDS))
    p.add_argument("--label", choices=["T", "F"], required=True,
                   help="class of these snapshots (T = phishing, F = legitimate)")
    p.add_argument("--min-present", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("rank", help="attribute ranking with four evaluators")
    p.add_argument("--data", required=True)
    p.add_argument("--relieff-k", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("train", help="train and save a model")
    p.add_argument("--data", required=True)
    p.add_argument("--model", choices=["rf", "dt", "nb"], required=True)
    p.add_argument("--features", default=",".join(FEATURE_NAMES))
    p.add_argument("--n-trees", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="re-train a saved model's configuration under a protocol")
    p.add_argument("--data", required=True)
    p.add_argument("--model-file", required=True)
    p.add_argument("--protocol", default="cv10", help="cvK or holdoutPP (e.g. cv10, holdout80)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="evaluate models on all 31 feature subsets")
    p.add_argument("--data", required=True)
    p.add_argument("--models", default="rf,dt,nb")
    p.add_argument("--protocol", default="cv10")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--no-timing", action="store_true", help="blank timing columns (reproducible CSV)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scan", help="classify one URL (exit 0 legitimate, 3 phishing, 1 error)")
    p.add_argument("target", help="URL, or snapshot file with --offline")
    p.add_argument("--model-file", help="model JSON (default: bundled demo model)")
    p.add_argument("--offline", action="store_true")
    p.add_argument("--psl")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--json", action="store_true")
    _tls_flags(p)
    p.set_defaults(func=cmd_scan)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as e:
        print(f"bdi {args.command}: {e}", file=sys.stderr)
        return EXIT_ERROR
