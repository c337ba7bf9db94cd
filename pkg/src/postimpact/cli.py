"""Command-line surface: pipeline subcommands plus service launcher.

Corpus-stage commands compose as a pipe:

    postimpact ingest raw.jsonl | postimpact filter | postimpact label --out labeled.jsonl

Training and evaluation expect a labeled corpus (the output of `label`).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime
from pathlib import Path

from . import bundle as bundle_mod
from . import corpus as corpus_mod
from . import evaluation, learners, textprep
from .corpus import Impact, LinkKind, ProblemKind
from .errors import PostImpactError
from .features import FeatureConfig, fit_pipeline, prepare_post


def _open_input(path: str | None):
    if path in (None, "-"):
        return sys.stdin
    return open(path, "r", encoding="utf-8")


def _read_posts(path: str | None) -> list[corpus_mod.Post]:
    fh = _open_input(path)
    try:
        return corpus_mod.ingest(fh)
    finally:
        if fh is not sys.stdin:
            fh.close()


def _write_records(records, out: str | None) -> None:
    fh = sys.stdout if out in (None, "-") else open(out, "w", encoding="utf-8")
    try:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


# --- subcommand handlers -----------------------------------------------------

def cmd_ingest(args) -> int:
    posts = _read_posts(args.path)
    _write_records((corpus_mod.post_to_record(p) for p in posts), args.out)
    print(f"ingested {len(posts)} posts", file=sys.stderr)
    return 0


def cmd_filter(args) -> int:
    posts = _read_posts(args.path)
    kept, removed = corpus_mod.filter_posts(posts)
    _write_records((corpus_mod.post_to_record(p) for p in kept), args.out)
    if args.removed:
        _write_records(
            ({**corpus_mod.post_to_record(p), "reason": r.value} for p, r in removed),
            args.removed)
    print(f"kept {len(kept)} / {len(posts)} posts ({len(removed)} removed)",
          file=sys.stderr)
    return 0


def cmd_label(args) -> int:
    posts = _read_posts(args.path)
    labeled = corpus_mod.label_posts(posts)
    _write_records(corpus_mod.iter_labeled_records(labeled), args.out)
    counts = corpus_mod.label_counts(labeled)
    for brand in sorted(counts):
        line = "  ".join(f"{k.value}:{hi}/{lo}" for k, (hi, lo) in counts[brand].items())
        print(f"{brand}: {line}", file=sys.stderr)
    return 0


def cmd_stats(args) -> int:
    posts = _read_posts(args.path)
    stats = corpus_mod.compute_stats(posts, textprep.pipeline_tokens)
    print("# per-post averages use population standard deviation")
    header = f"{'brand':24} {'posts':>6} {'tokens':>8} {'vocab':>7} {'LR':>6} "\
             f"{'tok/post':>16} {'chars/post':>18}"
    print(header)
    for brand in sorted(stats.brands):
        b = stats.brands[brand]
        print(f"{brand:24} {b.post_count:>6} {b.token_count:>8} {b.vocabulary_size:>7} "
              f"{b.lexical_richness:>6.3f} "
              f"{b.avg_tokens_per_post:>8.2f} ({b.std_tokens_per_post:6.2f}) "
              f"{b.avg_chars_per_post:>9.2f} ({b.std_chars_per_post:7.2f})")
    return 0


def cmd_normalize(args) -> int:
    text = args.text if args.text is not None else sys.stdin.read()
    norm = textprep.normalize(text)
    print(norm.text)
    c = norm.counts
    print(f"urls={c.urls} hashtags={c.hashtags} emojis={c.emojis} mentions={c.mentions}",
          file=sys.stderr)
    return 0


def cmd_featurize(args) -> int:
    posts = _read_posts(args.corpus)
    if not posts:
        print("empty corpus", file=sys.stderr)
        return 1
    config = FeatureConfig.parse(args.config, vocab_size_cap=args.cap)
    prepared = [prepare_post(p) for p in posts]
    state, vectors = fit_pipeline(prepared, config)
    records = (
        {"id": p.id, "dim": v.dim,
         "features": {str(i): val for i, val in v.to_dict().items()}}
        for p, v in zip(posts, vectors)
    )
    _write_records(records, args.out)
    return 0


def _load_labeled(path: str) -> list[corpus_mod.LabeledPost]:
    labeled = corpus_mod.read_labeled(path)
    if not labeled:
        raise PostImpactError(f"no labeled posts in {path}")
    return labeled


def _train_one(labeled, problem: ProblemKind, config: FeatureConfig,
               kind: learners.LearnerKind, seed: int, balanced: bool) -> learners.Model:
    prepared = [prepare_post(lp.post) for lp in labeled]
    state, vectors = fit_pipeline(prepared, config)
    labels = [lp.labels[problem] for lp in labeled]
    return learners.train(kind, problem, vectors, labels, config=config,
                          normalizer=state.normalizer, vocabulary=state.vocabulary,
                          time_profile=state.time_profile, seed=seed,
                          balanced=balanced)


def _best_cells_from_report(report_path: str) -> dict[ProblemKind, tuple[str, str]]:
    """Best (config, learner) per problem by mean macro-F1 from a report.json."""
    obj = json.loads(Path(report_path).read_text(encoding="utf-8"))
    best: dict[ProblemKind, tuple[float, str, str]] = {}
    for cell in obj["cells"]:
        if cell.get("skipped"):
            continue
        kind = ProblemKind(cell["problem"])
        score = cell["mean_macro_f1"]
        if kind not in best or score > best[kind][0]:
            best[kind] = (score, cell["config"], cell["learner"])
    return {k: (cfg, lrn) for k, (_, cfg, lrn) in best.items()}


def cmd_train(args) -> int:
    labeled = _load_labeled(args.corpus)

    if args.problem == "all":
        out_dir = Path(args.out)
        choices: dict[ProblemKind, tuple[str, str]] = {}
        if args.from_report:
            choices = _best_cells_from_report(args.from_report)
        models = {}
        for problem in ProblemKind:
            cfg_key, lrn_key = choices.get(problem, (args.config, args.learner))
            config = FeatureConfig.parse(cfg_key, vocab_size_cap=args.cap)
            kind = learners.LearnerKind(lrn_key)
            models[problem] = _train_one(labeled, problem, config, kind,
                                         args.seed, args.balanced)
            print(f"trained {problem.value}: {lrn_key} on {config.key}", file=sys.stderr)
        bundle_mod.save_bundle(models, out_dir)
        print(f"bundle written to {out_dir}", file=sys.stderr)
        return 0

    problem = ProblemKind(args.problem)
    config = FeatureConfig.parse(args.config, vocab_size_cap=args.cap)
    kind = learners.LearnerKind(args.learner)
    model = _train_one(labeled, problem, config, kind, args.seed, args.balanced)
    learners.save(model, args.out)
    print(f"model written to {args.out}", file=sys.stderr)
    return 0


def cmd_evaluate(args) -> int:
    labeled = _load_labeled(args.corpus)
    if args.plan == "set1":
        plan = evaluation.figure_set1_plan(seed=args.seed)
    elif args.plan == "set2":
        plan = evaluation.figure_set2_plan(seed=args.seed)
    else:
        obj = json.loads(Path(args.plan).read_text(encoding="utf-8"))
        if args.seed is not None:
            obj["seed"] = args.seed
        plan = evaluation.ExperimentPlan.from_dict(obj)
    report = evaluation.run(plan, labeled, max_workers=args.workers)
    paths = evaluation.emit_report(report, args.out)
    for p in paths:
        print(f"wrote {p}", file=sys.stderr)
    return 0


def cmd_predict(args) -> int:
    loaded = bundle_mod.load_bundle(args.bundle)
    if args.text is not None:
        text = args.text
    elif args.file:
        text = Path(args.file).read_text(encoding="utf-8")
    else:
        text = sys.stdin.read()
    published_at = datetime.fromisoformat(args.published_at) if args.published_at else None
    draft = bundle_mod.DraftPost(text=text, link_kind=LinkKind(args.link_kind),
                                 published_at=published_at)
    result = bundle_mod.forecast(draft, loaded)
    for kind in ProblemKind:
        pred = result.predictions[kind]
        print(f"{kind.value:3} {pred.label.value:4} {pred.score:.4f}")
    return 0


def cmd_explain(args) -> int:
    model = learners.load(args.model)
    ranking = learners.explain(model, top_n=args.top)
    print(f"# problem {model.problem.value}, learner {model.kind.value}, "
          f"config {model.config.key}")
    for side in ("high", "low"):
        print(f"[{side}]")
        for token, log_odds in ranking[side]:
            print(f"  {token:30} {log_odds:+.4f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app_from_dir

    app = create_app_from_dir(args.bundle, max_in_flight=args.max_in_flight,
                              static_dir=args.static)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    except OSError as exc:
        print(f"cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 1
    return 0


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="postimpact",
                                     description="Engagement impact prediction toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and validate a corpus file")
    p.add_argument("path", nargs="?", help="corpus JSONL (default: stdin)")
    p.add_argument("--out", help="write canonical JSONL here (default: stdout)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("filter", help="drop text-less / reaction-less / like-only posts")
    p.add_argument("path", nargs="?")
    p.add_argument("--out")
    p.add_argument("--removed", help="also write removed posts with reasons")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("label", help="attach high/low labels for all six problems")
    p.add_argument("path", nargs="?")
    p.add_argument("--out")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("stats", help="per-brand corpus statistics")
    p.add_argument("path", nargs="?")
    p.add_argument("--by-brand", action="store_true", default=True,
                   help="group by brand (always on)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("normalize", help="debug text normalization")
    p.add_argument("--stdin", action="store_true", help="read text from stdin (default)")
    p.add_argument("--text", help="normalize this literal text instead")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("featurize", help="emit feature vectors for inspection")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config", required=True, help="e.g. c,b,s")
    p.add_argument("--cap", type=int, default=10_000, help="vocabulary size cap")
    p.add_argument("--out")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="train one model, or a full bundle with --problem all")
    p.add_argument("--problem", required=True,
                   help="R, R+, R-, R0, C, S, or 'all' for a bundle")
    p.add_argument("--config", default="c+b+s", help="feature blocks, e.g. c,b")
    p.add_argument("--learner", default="nb", choices=[k.value for k in learners.LearnerKind])
    p.add_argument("--corpus", required=True, help="labeled corpus (output of `label`)")
    p.add_argument("--out", required=True, help="model file, or bundle dir with --problem all")
    p.add_argument("--cap", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--balanced", action="store_true")
    p.add_argument("--from-report",
                   help="report.json; pick the best (config, learner) per problem")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="cross-validated evaluation run")
    p.add_argument("--plan", required=True, help="plan JSON path, or 'set1'/'set2'")
    p.add_argument("--corpus", required=True, help="labeled corpus")
    p.add_argument("--seed", type=int, default=None, help="override the plan seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="score a draft against a saved bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--text", help="draft text (otherwise --file or stdin)")
    p.add_argument("--file")
    p.add_argument("--link-kind", default="none",
                   choices=[k.value for k in LinkKind])
    p.add_argument("--published-at", help="ISO-8601 what-if posting time")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("explain", help="indicative tokens per class (Naive Bayes)")
    p.add_argument("--model", required=True)
    p.add_argument("--top", type=int, default=20)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("serve", help="run the draft-scoring HTTP service")
    p.add_argument("--bundle", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("POSTIMPACT_PORT", "8000")))
    p.add_argument("--max-in-flight", type=int, default=64)
    p.add_argument("--static", help="also serve a UI build (e.g. frontend/) at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PostImpactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
