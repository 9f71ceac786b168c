"""Command-line pipeline: ingest -> dedup -> link -> eval -> emit, plus the
crawl simulator, corpus stats, and the labeling service.

Commands share a --workdir holding the standard files (shadow_items.jsonl,
texts/, shingles/, signatures.bin, clusters.jsonl, candidates.jsonl, ...).
Reports are CSV; pass --figures to render a PNG next to each one.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import catalogue as cat
from . import crawl_planner, dedup, evaluation, ingest, linkage, records

log = logging.getLogger(__name__)


def _add_workdir(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workdir", type=Path, default=Path("."), help="pipeline working directory")


def cmd_ingest(args: argparse.Namespace) -> int:
    items_path = args.items or args.workdir / "shadow_items.jsonl"
    payloads = args.payloads or args.workdir / "payloads"
    items = ingest.load_shadow_items(items_path)
    result = ingest.run_ingest(items, payloads, args.workdir, k=args.shingle_k)
    records.write_jsonl(
        args.workdir / "retained_items.jsonl",
        (ingest.shadow_item_to_json(i) for i in result.retained),
    )
    print(f"ingest: {len(result.retained)} retained of {len(result.triage)} "
          f"(triage.csv, texts/, shingles/ under {args.workdir})")
    return 0


def cmd_dedup(args: argparse.Namespace) -> int:
    items_path = args.items or args.workdir / "retained_items.jsonl"
    items = ingest.load_shadow_items(items_path)
    shingles_dir = args.shingles or args.workdir / "shingles"
    signatures = []
    for item in items:
        shingle_set = ingest.read_shingles(shingles_dir / f"{item.item_id}.bin", item.item_id)
        signatures.append(dedup.minhash(shingle_set, num_perm=args.num_perm, seed=args.seed))
    params = dedup.optimal_params(args.threshold, args.num_perm)
    clusters = dedup.cluster(items, signatures, params, s_star=args.threshold,
                             min_cluster_size=args.min_cluster_size)
    dedup.write_signatures(args.workdir / "signatures.bin", signatures)
    dedup.write_clusters(args.workdir / "clusters.jsonl", clusters)
    multi = sum(1 for c in clusters if not c.is_singleton)
    print(f"dedup: {len(signatures)} signatures; LSH b={params.bands} r={params.rows}; "
          f"{len(clusters)} clusters ({multi} multi-item)")
    return 0


def cmd_link(args: argparse.Namespace) -> int:
    clusters = dedup.read_clusters(args.clusters or args.workdir / "clusters.jsonl")
    works = records.load_works(args.works)
    editions = records.load_editions(args.editions)
    language = None if args.language == "all" else args.language
    result = linkage.link_clusters(clusters, works, editions, language=language)
    linkage.write_candidates(args.workdir / "candidates.jsonl", result.candidates)
    accepted, rejected = linkage.apply_threshold(result.candidates, args.threshold)
    print(f"link: {len(result.candidates)} candidates "
          f"({len(accepted)} >= {args.threshold:g}, {len(rejected)} below); "
          f"dropped: {len(result.no_title_basis)} no_title_basis, "
          f"{len(result.no_edition_in_language)} no_edition_in_language")
    if result.candidates:
        med, q1, q3 = evaluation.score_distribution_stats(result.candidates)
        print(f"link: title score median {med:.1f} (IQR {q1:.1f}-{q3:.1f})")
    return 0


def cmd_eval_sample(args: argparse.Namespace) -> int:
    from .eval_service import build_plan

    candidates = linkage.read_candidates(args.candidates or args.workdir / "candidates.jsonl")
    sample = evaluation.stratified_sample(candidates, seed=args.seed)
    works = records.load_works(args.works)
    clusters = dedup.read_clusters(args.clusters or args.workdir / "clusters.jsonl")
    plan = build_plan(
        sample.keys, candidates, works, clusters,
        texts_dir=args.texts or args.workdir / "texts",
        seed=args.seed, operating_threshold=args.threshold,
    )
    out = args.plan_out or args.workdir / "plan.json"
    Path(out).write_text(json.dumps(plan, ensure_ascii=False, indent=2), encoding="utf-8")
    print(f"eval sample: {len(sample.keys)} tasks -> {out}")
    for bin_idx, (requested, available) in sorted(sample.shortfalls.items()):
        print(f"  shortfall in bin {bin_idx}: requested {requested}, available {available}")
    return 0


def cmd_eval_curve(args: argparse.Namespace) -> int:
    labels = evaluation.read_labels(args.labels or args.workdir / "labels.jsonl")
    candidates = linkage.read_candidates(args.candidates or args.workdir / "candidates.jsonl")
    curve = evaluation.pr_curve(labels, candidates, bootstrap_B=args.bootstrap, seed=args.seed)
    out = args.out or args.workdir / "pr_curve.csv"
    evaluation.write_pr_curve_csv(out, curve)
    print(f"eval curve: {curve.n_labeled} conclusive labels, {curve.n_unknown} unknown -> {out}")
    if args.figures:
        from .report import render_pr_curve

        figure = render_pr_curve(curve, Path(out).with_suffix(".png"), args.threshold)
        print(f"eval curve: figure -> {figure}")
    return 0


def cmd_eval_report(args: argparse.Namespace) -> int:
    labels = evaluation.read_labels(args.labels or args.workdir / "labels.jsonl")
    candidates = linkage.read_candidates(args.candidates or args.workdir / "candidates.jsonl")
    relabels = evaluation.read_labels(args.relabels) if args.relabels else None
    report = evaluation.ambiguous_subset_report(labels, candidates, args.threshold, relabels)
    payload = {
        "threshold": report.threshold,
        "ambiguous_above_threshold": report.count,
        "unknown_total": report.n_unknown_total,
        "share_of_unknown": round(report.share_of_unknown, 4),
        "secondary_precision": report.secondary_precision,
        "items": [
            {"cluster_id": k[0], "work_id": k[1], "title_score": round(score, 4)}
            for k, score in report.items
        ],
    }
    print(json.dumps(payload, indent=2))
    return 0


def cmd_emit(args: argparse.Namespace) -> int:
    candidates = linkage.read_candidates(args.candidates or args.workdir / "candidates.jsonl")
    works = records.load_works(args.works)
    clusters = dedup.read_clusters(args.clusters or args.workdir / "clusters.jsonl")
    accepted, _ = linkage.apply_threshold(candidates, args.threshold)
    entries, coverage = cat.emit_catalogue(accepted, works, clusters, language=args.lang)
    out = args.out or args.workdir / f"catalogue_{args.lang}.jsonl"
    cat.write_catalogue(out, entries)
    print(f"emit: {coverage.entries} entries -> {out} "
          f"(genres {100 * coverage.genres_fraction:.2f}%, "
          f"reviews_count {100 * coverage.reviews_fraction:.2f}%)")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    stats_dir = args.workdir / "stats"
    stats_dir.mkdir(parents=True, exist_ok=True)
    wrote_any = False
    if args.table1:
        table = cat.read_language_shares(args.table1)
        shares = table.fractions(renormalize=True)
        plain = cat.herfindahl(shares, normalized=False)
        norm = cat.herfindahl(shares, normalized=True)
        cat.write_herfindahl_csv(stats_dir / "herfindahl.csv", [(args.corpus, plain, norm)])
        cat.write_language_shares_csv(stats_dir / "languages.csv", table)
        print(f"stats: {args.corpus}: H = {plain:.4f} (normalized {norm:.4f}) -> {stats_dir}")
        if args.figures:
            from .report import render_language_shares

            render_language_shares(table, stats_dir / "languages.png")
        wrote_any = True
    if args.decades_from:
        rows = list(records.read_jsonl(args.decades_from))
        histogram = cat.decade_histogram(rows, year_field=args.year_field)
        out = stats_dir / f"decades_{args.corpus}.csv"
        cat.write_decades_csv(out, histogram)
        print(f"stats: decade histogram ({len(histogram)} buckets) -> {out}")
        if args.figures:
            from .report import render_decade_histogram

            render_decade_histogram(histogram, out.with_suffix(".png"), title=args.corpus)
        wrote_any = True
    if not wrote_any:
        print("stats: nothing to do (pass --table1 and/or --decades-from)", file=sys.stderr)
        return 2
    return 0


def cmd_crawl_sim(args: argparse.Namespace) -> int:
    provider = crawl_planner.FixtureProvider(args.fixture)
    state = crawl_planner.expand(provider, max_depth=args.max_depth)
    out = args.out or args.workdir / "crawl_series.csv"
    crawl_planner.write_crawl_series_csv(out, state)
    print(f"crawl-sim: works per depth {state.works_series} -> {out}")
    if state.failures:
        print(f"crawl-sim: {len(state.failures)} provider failures (ids skipped)")
    if args.figures:
        from .report import render_crawl_series

        figure = render_crawl_series(state, Path(out).with_suffix(".png"))
        print(f"crawl-sim: figure -> {figure}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .eval_service import run_service

    run_service(args.plan, args.labels or args.workdir / "labels.jsonl",
                port=args.port, host=args.host)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="majinlink", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="triage items, extract text, write shingles")
    _add_workdir(p)
    p.add_argument("--items", type=Path, help="shadow_items.jsonl")
    p.add_argument("--payloads", type=Path, help="directory of payload files")
    p.add_argument("--shingle-k", type=int, default=3)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("dedup", help="MinHash + LSH near-duplicate clustering")
    _add_workdir(p)
    p.add_argument("--items", type=Path, help="retained_items.jsonl")
    p.add_argument("--shingles", type=Path, help="shingles directory")
    p.add_argument("--threshold", type=float, default=0.8)
    p.add_argument("--num-perm", type=int, default=dedup.DEFAULT_NUM_PERM)
    p.add_argument("--seed", type=int, default=dedup.DEFAULT_SEED)
    p.add_argument("--min-cluster-size", type=int, default=1)
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("link", help="identifier-overlap candidates with title scores")
    _add_workdir(p)
    p.add_argument("--clusters", type=Path)
    p.add_argument("--works", type=Path, required=True)
    p.add_argument("--editions", type=Path, required=True)
    p.add_argument("--threshold", type=float, default=80.0)
    p.add_argument("--language", default="all", help="cluster language filter, or 'all'")
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("eval", help="human-evaluation workflow")
    eval_sub = p.add_subparsers(dest="eval_command", required=True)

    q = eval_sub.add_parser("sample", help="draw the stratified sample and build a labeling plan")
    _add_workdir(q)
    q.add_argument("--candidates", type=Path)
    q.add_argument("--works", type=Path, required=True)
    q.add_argument("--clusters", type=Path)
    q.add_argument("--texts", type=Path)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--threshold", type=float, default=80.0)
    q.add_argument("--plan-out", type=Path)
    q.set_defaults(func=cmd_eval_sample)

    q = eval_sub.add_parser("curve", help="precision/recall/retention vs threshold")
    _add_workdir(q)
    q.add_argument("--labels", type=Path)
    q.add_argument("--candidates", type=Path)
    q.add_argument("--out", type=Path)
    q.add_argument("--bootstrap", type=int, default=1000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--threshold", type=float, default=80.0)
    q.add_argument("--figures", action="store_true", help="render a PNG next to the CSV")
    q.set_defaults(func=cmd_eval_curve)

    q = eval_sub.add_parser("report", help="ambiguous (unknown) candidates above threshold")
    _add_workdir(q)
    q.add_argument("--labels", type=Path)
    q.add_argument("--candidates", type=Path)
    q.add_argument("--relabels", type=Path, help="second-round labels for the ambiguous subset")
    q.add_argument("--threshold", type=float, default=80.0)
    q.set_defaults(func=cmd_eval_report)

    p = sub.add_parser("emit", help="write the final catalogue for one language")
    _add_workdir(p)
    p.add_argument("--candidates", type=Path)
    p.add_argument("--works", type=Path, required=True)
    p.add_argument("--clusters", type=Path)
    p.add_argument("--lang", default="en")
    p.add_argument("--threshold", type=float, default=80.0)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("stats", help="language shares, Herfindahl, decade histograms")
    _add_workdir(p)
    p.add_argument("--table1", type=Path, help="CSV of (language, share-in-percent)")
    p.add_argument("--decades-from", type=Path, help="JSONL with a year field")
    p.add_argument("--year-field", default="first_publication_year")
    p.add_argument("--corpus", default="corpus", help="label for output files")
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("crawl-sim", help="run the frontier expansion against a fixture graph")
    _add_workdir(p)
    p.add_argument("--fixture", type=Path, required=True)
    p.add_argument("--max-depth", type=int, default=crawl_planner.DEFAULT_MAX_DEPTH)
    p.add_argument("--out", type=Path)
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=cmd_crawl_sim)

    p = sub.add_parser("serve", help="run the labeling HTTP service")
    _add_workdir(p)
    p.add_argument("--plan", type=Path, required=True)
    p.add_argument("--labels", type=Path)
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
