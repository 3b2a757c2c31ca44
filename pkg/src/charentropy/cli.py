"""Command-line entry point.

Subcommands:
    corpus prepare      build the sentence pool from raw articles
    serve               run the experiment HTTP server
    analyze bounds      pooled entropy bounds + figure-data CSVs
    analyze trim-table  trim sensitivity table with bootstrap CIs
    analyze bootstrap   bootstrap CI at a single trim level
    llm-eval            bits-per-character of token models via a provider
    export-figures      per-position and per-session CSVs only
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import secrets
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import estimator, llm_eval, robustness
from .alphabet import Alphabet, ukrainian
from .errors import CharentropyError, DegenerateAccuracy
from .session import read_observations


def _load_alphabet(path: str | None) -> Alphabet:
    if path is None:
        return ukrainian()
    return Alphabet.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _parse_window(text: str) -> estimator.PositionWindow:
    n1, n2 = text.split(":")
    return estimator.PositionWindow(int(n1), int(n2))


def _file_hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _pick_seed(args) -> int:
    return args.seed if args.seed is not None else secrets.randbelow(2**31)


def cmd_corpus_prepare(args) -> int:
    articles = corpus_mod.load_articles(args.indir, args.manifest)
    pool = corpus_mod.build_pool(
        articles, _load_alphabet(args.alphabet),
        min_len=args.min_len, max_len=args.max_len,
    )
    corpus_mod.write_pool(pool, args.out)
    print(f"wrote {len(pool)} sentences to {args.out}")
    return 0


def _grouped_sessions(observations):
    by_session = {}
    for o in observations:
        by_session.setdefault(o.session_id, []).append(o)
    return by_session


def _load_totals(path: str | None) -> dict | None:
    """Optional JSONL of {session_id, total_guesses} for exact guess counts."""
    if path is None:
        return None
    totals = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                totals[rec["session_id"]] = rec["total_guesses"]
    return totals


def _write_figure_csvs(observations, window, k, out_dir: Path) -> dict:
    """Per-position bounds, per-position counts, per-session scores."""
    out_dir.mkdir(parents=True, exist_ok=True)
    per_pos = estimator.per_position_bounds(observations, window, k)
    paths = {}

    paths["entropy_by_position"] = out_dir / "entropy_by_position.csv"
    with open(paths["entropy_by_position"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["position", "h_lower", "h_upper", "n_obs"])
        for pos, (b, n) in per_pos.items():
            w.writerow([pos, f"{b.h_lower:.6f}", f"{b.h_upper:.6f}", n])

    paths["observations_by_position"] = out_dir / "observations_by_position.csv"
    with open(paths["observations_by_position"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["position", "n_obs"])
        for pos, (_, n) in per_pos.items():
            w.writerow([pos, n])

    paths["session_scores"] = out_dir / "session_scores.csv"
    scores = sorted(
        (estimator.session_score(obs, k), sid)
        for sid, obs in _grouped_sessions(observations).items()
    )
    with open(paths["session_scores"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rank", "session_id", "score_bpc"])
        for rank, (score, sid) in enumerate(scores, start=1):
            w.writerow([rank, sid, f"{score:.6f}"])

    return {name: str(p) for name, p in paths.items()}


def _filter_or_skip(summaries, alpha):
    """Binomial outlier filter; a degenerate pool (accuracy 0 or 1) has no
    useful tail test, so everything is kept."""
    try:
        return robustness.binomial_outlier_filter(summaries, alpha=alpha)
    except DegenerateAccuracy:
        return list(summaries), []


def cmd_analyze_bounds(args) -> int:
    alphabet = _load_alphabet(args.alphabet)
    window = _parse_window(args.window)
    seed = _pick_seed(args)
    observations = read_observations(args.obs)
    k = alphabet.size

    summaries = robustness.summarize_sessions(
        observations, k, totals=_load_totals(args.sessions))
    kept, discarded = _filter_or_skip(summaries, args.alpha)
    retained = robustness.trim_bottom(kept, args.trim)
    retained_ids = {s.session_id for s in retained}
    retained_obs = [o for o in observations if o.session_id in retained_ids]

    pooled = estimator.pooled_estimate(retained_obs, window, k)
    by_session = _grouped_sessions(retained_obs)
    boot = robustness.bootstrap_upper(
        [by_session[s.session_id] for s in retained],
        window, k, replicates=args.replicates, seed=seed,
    )
    out_dir = Path(args.out).parent if Path(args.out).parent != Path("") else Path(".")
    csv_paths = _write_figure_csvs(retained_obs, window, k, out_dir / "figures")

    report = {
        "h_upper": pooled.h_upper,
        "h_lower": pooled.h_lower,
        "redundancy": pooled.redundancy,
        "n_obs": pooled.n_obs,
        "sessions_total": len(summaries),
        "sessions_discarded_binomial": len(discarded),
        "sessions_retained": len(retained),
        "trim": args.trim,
        "bootstrap": {
            "replicates": boot.replicates,
            "median": boot.median,
            "ci95": list(boot.ci95),
            "seed": seed,
            "resamples_post_trim_pool": True,
        },
        "window": {"n1": window.n1, "n2": window.n2},
        "alphabet_size": k,
        "figure_csvs": csv_paths,
        "input_hashes": {"observations": _file_hash(args.obs)},
    }
    Path(args.out).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    print(f"h_upper={pooled.h_upper:.4f} h_lower={pooled.h_lower:.4f} "
          f"redundancy={pooled.redundancy:.3f} "
          f"ci95=[{boot.ci95[0]:.3f}, {boot.ci95[1]:.3f}]")
    return 0


def cmd_analyze_trim_table(args) -> int:
    alphabet = _load_alphabet(args.alphabet)
    window = _parse_window(args.window)
    seed = _pick_seed(args)
    observations = read_observations(args.obs)
    k = alphabet.size
    fractions = [float(x) for x in args.trims.split(",")]

    summaries = robustness.summarize_sessions(
        observations, k, totals=_load_totals(args.sessions))
    kept, _ = _filter_or_skip(summaries, args.alpha)
    rows = robustness.trim_table(
        _grouped_sessions(observations), kept, fractions,
        window, k, replicates=args.replicates, seed=seed,
    )
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trim", "pool", "point_estimate", "bootstrap_median",
                    "ci95_lo", "ci95_hi", "ci_width", "seed"])
        for row in rows:
            w.writerow([row.trim_fraction, row.pool_size,
                        f"{row.point_estimate:.4f}",
                        f"{row.bootstrap_median:.4f}",
                        f"{row.ci95[0]:.4f}", f"{row.ci95[1]:.4f}",
                        f"{row.ci_width:.4f}", seed])
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_analyze_bootstrap(args) -> int:
    alphabet = _load_alphabet(args.alphabet)
    window = _parse_window(args.window)
    seed = _pick_seed(args)
    observations = read_observations(args.obs)
    k = alphabet.size

    summaries = robustness.summarize_sessions(
        observations, k, totals=_load_totals(args.sessions))
    kept, _ = _filter_or_skip(summaries, args.alpha)
    retained = robustness.trim_bottom(kept, args.trim)
    by_session = _grouped_sessions(observations)
    boot = robustness.bootstrap_upper(
        [by_session[s.session_id] for s in retained],
        window, k, replicates=args.replicates, seed=seed,
    )
    result = {
        "replicates": boot.replicates,
        "median": boot.median,
        "ci95": list(boot.ci95),
        "ci_width": boot.ci95[1] - boot.ci95[0],
        "seed": seed,
        "trim": args.trim,
    }
    Path(args.out).write_text(json.dumps(result, indent=2) + "\n", encoding="utf-8")
    print(f"median={boot.median:.4f} ci95=[{boot.ci95[0]:.4f}, {boot.ci95[1]:.4f}]")
    return 0


def cmd_export_figures(args) -> int:
    alphabet = _load_alphabet(args.alphabet)
    window = _parse_window(args.window)
    observations = read_observations(args.obs)
    paths = _write_figure_csvs(observations, window, alphabet.size, Path(args.out))
    for name, p in paths.items():
        print(f"{name}: {p}")
    return 0


def cmd_llm_eval(args) -> int:
    sentences = corpus_mod.read_pool(args.corpus)
    results = []
    for model_id in args.model:
        if args.provider.startswith("mock:"):
            mock = llm_eval.FileMockProvider(args.provider[len("mock:"):])
            fetch = mock.fetch
        else:
            cfg = llm_eval.ProviderConfig(
                endpoint=args.provider, model_id=model_id,
                timeout=args.timeout, max_retries=args.max_retries,
                auth_token=os.environ.get("CHARENTROPY_PROVIDER_TOKEN"),
            )
            fetch = lambda text, cfg=cfg: llm_eval.fetch_logprobs(text, cfg)
        results.append(
            llm_eval.evaluate_corpus(sentences, model_id, fetch,
                                     mask_from=args.mask_from)
        )
    results.sort(key=lambda r: r.bpc)
    payload = {"results": [r.to_dict() for r in results],
               "mask_from": args.mask_from,
               "corpus_hash": _file_hash(args.corpus)}
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    for r in results:
        print(f"{r.model_id}: bpc={r.bpc:.4f} fertility={r.fertility:.2f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, Store, create_app

    config = ServiceConfig(
        corpus_path=os.environ.get("CHARENTROPY_CORPUS", args.corpus),
        log_path=os.environ.get("CHARENTROPY_LOG", args.log),
        prefix_len=int(os.environ.get("CHARENTROPY_PREFIX_LEN", args.prefix_len)),
        min_attempt_interval=float(
            os.environ.get("CHARENTROPY_MIN_INTERVAL", args.min_interval)),
        session_ttl=float(os.environ.get("CHARENTROPY_SESSION_TTL", args.session_ttl)),
        export_salt=os.environ.get("CHARENTROPY_EXPORT_SALT", args.export_salt),
    )
    store = Store(config, clock=__import__("time").time)
    app = create_app(store)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="charentropy", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("corpus", help="corpus commands")
    corpus_sub = p.add_subparsers(dest="subcommand", required=True)
    prep = corpus_sub.add_parser("prepare", help="build the sentence pool")
    prep.add_argument("--in", dest="indir", required=True)
    prep.add_argument("--manifest", required=True)
    prep.add_argument("--out", required=True)
    prep.add_argument("--min-len", dest="min_len", type=int, default=120)
    prep.add_argument("--max-len", dest="max_len", type=int, default=200)
    prep.add_argument("--alphabet", default=None)
    prep.set_defaults(func=cmd_corpus_prepare)

    p = sub.add_parser("analyze", help="analysis commands")
    analyze_sub = p.add_subparsers(dest="subcommand", required=True)

    def common_analysis_args(sp):
        sp.add_argument("--obs", required=True)
        sp.add_argument("--sessions", default=None,
                        help="optional JSONL with exact per-session guess totals")
        sp.add_argument("--window", default="70:110")
        sp.add_argument("--alphabet", default=None)
        sp.add_argument("--alpha", type=float, default=0.01)
        sp.add_argument("--replicates", type=int, default=2000)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", required=True)

    bounds = analyze_sub.add_parser("bounds", help="pooled entropy bounds")
    common_analysis_args(bounds)
    bounds.add_argument("--trim", type=float, default=0.65)
    bounds.set_defaults(func=cmd_analyze_bounds)

    trim = analyze_sub.add_parser("trim-table", help="trim sensitivity table")
    common_analysis_args(trim)
    trim.add_argument("--trims", default="0,0.1,0.2,0.3,0.4,0.5,0.55,0.6,0.65,0.7,0.8,0.9")
    trim.set_defaults(func=cmd_analyze_trim_table)

    boot = analyze_sub.add_parser("bootstrap", help="bootstrap CI at one trim")
    common_analysis_args(boot)
    boot.add_argument("--trim", type=float, default=0.65)
    boot.set_defaults(func=cmd_analyze_bootstrap)

    fig = sub.add_parser("export-figures", help="figure-data CSVs")
    fig.add_argument("--obs", required=True)
    fig.add_argument("--window", default="70:110")
    fig.add_argument("--alphabet", default=None)
    fig.add_argument("--out", required=True)
    fig.set_defaults(func=cmd_export_figures)

    llm = sub.add_parser("llm-eval", help="bits-per-character of token models")
    llm.add_argument("--corpus", required=True)
    llm.add_argument("--provider", required=True,
                     help="provider URL, or mock:FILE for the offline mock")
    llm.add_argument("--model", action="append", required=True)
    llm.add_argument("--mask-from", dest="mask_from", type=int, default=70)
    llm.add_argument("--timeout", type=float, default=30.0)
    llm.add_argument("--max-retries", dest="max_retries", type=int, default=3)
    llm.add_argument("--out", required=True)
    llm.set_defaults(func=cmd_llm_eval)

    srv = sub.add_parser("serve", help="run the experiment server")
    srv.add_argument("--corpus", required=True)
    srv.add_argument("--log", default="events.jsonl")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--prefix-len", dest="prefix_len", type=int, default=70)
    srv.add_argument("--min-interval", dest="min_interval", type=float, default=0.3)
    srv.add_argument("--session-ttl", dest="session_ttl", type=float,
                     default=24 * 3600.0)
    srv.add_argument("--export-salt", dest="export_salt", default="charentropy")
    srv.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CharentropyError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
