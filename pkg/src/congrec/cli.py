"""Batch command line: simulate, train, evaluate, recommend, validate, serve.

Every writing subcommand emits a run manifest next to its outputs with the
resolved configuration, input file hashes, seed, and tool version; rerunning
with the same inputs and seed reproduces every output byte for byte.
Failures print a one-line JSON object with a machine-readable error
category to stderr and exit 1; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .artifact import TrainedArtifact, train_artifact
from .classifier import FeatureSetKind, TrainingHyper, loo_evaluate
from .data import (
    SyntheticConfig,
    bundled_correlation,
    bundled_taxonomy,
    generate_synthetic,
    load_cohort,
    load_correlation,
    load_taxonomy,
    write_dataset,
)
from .errors import CongrecError, DataNotFound, InvalidConfig, ModelNotFound, UnknownUser
from .recommender import RecommenderConfig, build_fill, range_report, select_by_spread, simulate_ranges
from .serialize import dump_json, hash_file
from .validation import format_validation_table, validate_cohort, validation_document

PLACEHOLDER_NOTE = (
    "PLACEHOLDER activity-trait correlations: synthetic values drawn with a fixed seed.\n"
    "These are NOT estimates from any published study. Substitute a real table in the\n"
    "same format (header of category ids, five rows labeled E,A,C,N,O) for real use."
)

_FEATURE_ALIASES = {
    "personality": FeatureSetKind.PERSONALITY,
    "activity": FeatureSetKind.ACTIVITY,
    "both": FeatureSetKind.PERSONALITY_ACTIVITY,
    "personality_activity": FeatureSetKind.PERSONALITY_ACTIVITY,
    "congruence": FeatureSetKind.CONGRUENCE,
}


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise DataNotFound(f"no config file at {p}")
    try:
        doc = json.loads(p.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config file is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise InvalidConfig("config file must hold a JSON object")
    return doc


def _resolve(args: argparse.Namespace, cfg: dict, name: str, default):
    """Flag wins over config file wins over built-in default."""
    flag = getattr(args, name, None)
    if flag is not None:
        return flag
    if name in cfg:
        return cfg[name]
    return default


def _data_dir(path: str) -> Path:
    d = Path(path)
    missing = [
        f
        for f in ("participants.csv", "ema.csv", "taxonomy.json", "correlation.csv")
        if not (d / f).exists()
    ]
    if missing:
        raise DataNotFound(f"data directory {d} is missing {', '.join(missing)}")
    return d


def _model_path(path: str | None) -> Path:
    p = Path(path) if path else None
    if p is None:
        env = os.environ.get("CONGREC_MODEL_PATH")
        p = Path(env) if env else None
    if p is None or not p.exists():
        raise ModelNotFound(f"no model file at {p}" if p else "no model path given")
    return p


def _write_manifest(out_dir: Path, subcommand: str, config: dict, inputs, seed, outputs: list[str]):
    # input files are keyed by name, not path, so identical reruns into
    # different directories still produce identical manifests
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "inputs": {Path(p).name: hash_file(p) for p in inputs},
        "seed": seed,
        "tool_version": __version__,
        "outputs": outputs,
    }
    dump_json(out_dir / "manifest.json", manifest)


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    cfgfile = _load_config_file(args.config)
    if args.data is not None:
        d = Path(args.data)
        taxonomy = load_taxonomy(d / "taxonomy.json")
        C = load_correlation(d / "correlation.csv", taxonomy)
        inputs = [d / "taxonomy.json", d / "correlation.csv"]
    else:
        taxonomy = bundled_taxonomy()
        C = bundled_correlation(taxonomy)
        inputs = []
    synth = SyntheticConfig(
        cohort_size=int(_resolve(args, cfgfile, "cohort_size", 150)),
        seed=int(_resolve(args, cfgfile, "seed", 42)),
        noise_sigma=float(_resolve(args, cfgfile, "noise_sigma", SyntheticConfig.noise_sigma)),
        effect_alpha=float(_resolve(args, cfgfile, "effect_alpha", SyntheticConfig.effect_alpha)),
        concentration=float(_resolve(args, cfgfile, "concentration", SyntheticConfig.concentration)),
        ema_days=int(_resolve(args, cfgfile, "days", SyntheticConfig.ema_days)),
        prompts_per_day=int(_resolve(args, cfgfile, "prompts_per_day", SyntheticConfig.prompts_per_day)),
    )
    participants, events = generate_synthetic(synth, C, taxonomy)
    out = _out_dir(args.out)
    names = write_dataset(out, participants, events, taxonomy, C, correlation_comment=PLACEHOLDER_NOTE)
    _write_manifest(out, "simulate", synth.to_dict(), inputs, synth.seed, names)
    print(f"wrote {len(participants)} participants, {len(events)} events to {out}")
    return 0


def _hyper_from_args(args, cfgfile) -> TrainingHyper:
    return TrainingHyper(
        regularization=float(_resolve(args, cfgfile, "regularization", 1.0)),
        max_passes=int(_resolve(args, cfgfile, "max_passes", 10_000)),
        tol=float(_resolve(args, cfgfile, "tol", 1e-6)),
        seed=int(_resolve(args, cfgfile, "seed", 0)),
        algorithm=str(_resolve(args, cfgfile, "algorithm", "svm")),
    )


def _cmd_train(args) -> int:
    cfgfile = _load_config_file(args.config)
    d = _data_dir(args.data)
    cohort, taxonomy, C = load_cohort(d)
    kind = _FEATURE_ALIASES[_resolve(args, cfgfile, "features", "congruence")]
    hyper = _hyper_from_args(args, cfgfile)
    anchor = str(_resolve(args, cfgfile, "median_anchor", "sample"))
    art = train_artifact(cohort, kind, C, taxonomy, hyper, median_anchor=anchor)
    out = _out_dir(args.out)
    art.save(out / "model.json")
    inputs = [d / f for f in ("participants.csv", "ema.csv", "taxonomy.json", "correlation.csv")]
    _write_manifest(
        out,
        "train",
        {"features": kind.value, "median_anchor": anchor, "hyper": hyper.to_dict()},
        inputs,
        hyper.seed,
        ["model.json"],
    )
    print(f"trained {kind.value} model on {len(cohort)} users -> {out / 'model.json'}")
    return 0


def _format_evaluation_table(reports) -> str:
    rows = [("Features", "Accuracy", "Kappa", "AUC")]
    for r in reports:
        rows.append((r.feature_kind.value, f"{100 * r.accuracy:.1f}%", f"{r.kappa:.2f}", f"{r.auc:.2f}"))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[j] for j in range(4)))
    return "\n".join(lines) + "\n"


def _cmd_evaluate(args) -> int:
    cfgfile = _load_config_file(args.config)
    d = _data_dir(args.data)
    cohort, taxonomy, C = load_cohort(d)
    choice = _resolve(args, cfgfile, "features", "all")
    kinds = list(FeatureSetKind) if choice == "all" else [_FEATURE_ALIASES[choice]]
    hyper = _hyper_from_args(args, cfgfile)
    anchor = str(_resolve(args, cfgfile, "median_anchor", "sample"))
    reports = [loo_evaluate(cohort, kind, C, hyper, median_anchor=anchor) for kind in kinds]
    out = _out_dir(args.out)
    doc = {
        "format_version": 1,
        "n_users": len(cohort),
        "hyper": hyper.to_dict(),
        "reports": [r.to_dict() for r in reports],
    }
    dump_json(out / "evaluation.json", doc)
    table = _format_evaluation_table(reports)
    (out / "evaluation.txt").write_text(table, encoding="utf-8")
    inputs = [d / f for f in ("participants.csv", "ema.csv", "taxonomy.json", "correlation.csv")]
    _write_manifest(
        out,
        "evaluate",
        {"features": choice, "median_anchor": anchor, "hyper": hyper.to_dict()},
        inputs,
        hyper.seed,
        ["evaluation.json", "evaluation.txt"],
    )
    print(table, end="")
    return 0


def _recommender_config(args, cfgfile) -> RecommenderConfig:
    m = _resolve(args, cfgfile, "m", None)
    return RecommenderConfig(
        step=float(_resolve(args, cfgfile, "step", 0.1)),
        lam=float(_resolve(args, cfgfile, "lam", 0.1)),
        m=int(m) if m is not None else None,
        variance_threshold=float(_resolve(args, cfgfile, "variance_threshold", 0.1)),
    ).validate()


def _cmd_recommend(args) -> int:
    cfgfile = _load_config_file(args.config)
    model_file = _model_path(args.model)
    art = TrainedArtifact.load(model_file)
    d = _data_dir(args.data)
    cohort, taxonomy, C = load_cohort(d)
    art.check_consistent(taxonomy, C)
    cfg = _recommender_config(args, cfgfile)
    users = {u.user_id: u for u in cohort}
    if args.user not in users:
        raise UnknownUser(f"user {args.user!r} not in {d / 'participants.csv'}")
    user = users[args.user]
    # varied activities and the cold-start fill base come from the training
    # cohort's statistics stored in the artifact, matching the service
    varied, fixed = select_by_spread(art.activity_std, m=cfg.m, variance_threshold=cfg.variance_threshold)
    if not fixed:
        cfg = RecommenderConfig(cfg.step, 0.0, cfg.m, cfg.variance_threshold, cfg.grid_cap)
    fill = build_fill(user.dist.proportions, fixed, cfg.lam, art.activity_mean)
    result = simulate_ranges(
        user.personality,
        fill,
        varied,
        cfg,
        art.model,
        C,
        art.p_median,
        feature_kind=art.feature_kind,
        workers=args.workers or 1,
    )
    report = range_report(result, taxonomy, art.model_hash())
    out = _out_dir(args.out)
    dump_json(out / "ranges.json", report)
    inputs = [model_file] + [d / f for f in ("participants.csv", "ema.csv", "taxonomy.json", "correlation.csv")]
    _write_manifest(
        out,
        "recommend",
        {"user": args.user, "workers": args.workers or 1, **cfg.to_dict()},
        inputs,
        None,
        ["ranges.json"],
    )
    print(f"grid {report['grid']['grid_count']} points, high {report['grid']['high_count']}, low {report['grid']['low_count']} -> {out / 'ranges.json'}")
    return 0


def _cmd_validate(args) -> int:
    cfgfile = _load_config_file(args.config)
    model_file = _model_path(args.model)
    art = TrainedArtifact.load(model_file)
    d = _data_dir(args.data)
    cohort, taxonomy, C = load_cohort(d)
    art.check_consistent(taxonomy, C)
    cfg = _recommender_config(args, cfgfile)
    k = _resolve(args, cfgfile, "k", None)
    reports, per_user = validate_cohort(
        cohort, art, C, taxonomy, cfg, k=int(k) if k is not None else None, workers=args.workers or 1
    )
    out = _out_dir(args.out)
    dump_json(out / "validation.json", validation_document(reports, per_user))
    table = format_validation_table(reports)
    (out / "validation.txt").write_text(table, encoding="utf-8")
    inputs = [model_file] + [d / f for f in ("participants.csv", "ema.csv", "taxonomy.json", "correlation.csv")]
    _write_manifest(
        out,
        "validate",
        {"k": int(k) if k is not None else None, "workers": args.workers or 1, **cfg.to_dict()},
        inputs,
        None,
        ["validation.json", "validation.txt"],
    )
    print(table, end="")
    return 0


def _cmd_serve(args) -> int:
    from .service import build_state, create_app

    model_file = _model_path(args.model)
    d = _data_dir(args.data) if args.data else None
    if d is None:
        raise DataNotFound("serve needs --data pointing at taxonomy.json and correlation.csv")
    cfgfile = _load_config_file(args.config)
    cfg = _recommender_config(args, cfgfile)
    state = build_state(model_file, d / "taxonomy.json", d / "correlation.csv", cfg)
    origins = tuple((args.cors_origin or "*").split(","))
    app = create_app(state, cors_origins=origins)
    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="congrec", description=__doc__)
    parser.add_argument("--version", action="version", version=f"congrec {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, data_required=True):
        p.add_argument("--config", help="JSON config file; explicit flags override it")
        p.add_argument("--seed", type=int, help="random seed (default 42 for simulate, 0 otherwise)")

    p = sub.add_parser("simulate", help="generate a seeded synthetic data directory")
    add_common(p)
    p.add_argument("--out", required=True, help="output data directory")
    p.add_argument("--data", help="take taxonomy/correlation from an existing data directory")
    p.add_argument("--cohort-size", dest="cohort_size", type=int, help="users to draw (default 150)")
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float, help="latent noise sd (default 0.06)")
    p.add_argument("--effect-alpha", dest="effect_alpha", type=float, help="congruence effect strength (default 1.96)")
    p.add_argument("--concentration", type=float, help="activity mix concentration (default 3.0)")
    p.add_argument("--days", type=int, help="study days (default 14)")
    p.add_argument("--prompts-per-day", dest="prompts_per_day", type=int, help="momentary prompts per day (default 5)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("train", help="fit a model on a data directory")
    add_common(p)
    p.add_argument("--data", required=True, help="input data directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--features", choices=["personality", "activity", "both", "congruence"], help="feature family (default congruence)")
    p.add_argument("--algorithm", choices=["svm", "nb"], help="classifier (default svm)")
    p.add_argument("--regularization", type=float, help="hinge term weight (default 1.0)")
    p.add_argument("--max-passes", dest="max_passes", type=int, help="solver sweep cap (default 10000)")
    p.add_argument("--tol", type=float, help="objective-change stop (default 1e-6)")
    p.add_argument("--median-anchor", dest="median_anchor", choices=["sample", "midpoint"], help="median personality source (default sample)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="leave-one-out comparison of feature families")
    add_common(p)
    p.add_argument("--data", required=True, help="input data directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--features", choices=["personality", "activity", "both", "congruence", "all"], help="feature families to evaluate (default all)")
    p.add_argument("--algorithm", choices=["svm", "nb"], help="classifier (default svm)")
    p.add_argument("--regularization", type=float, help="hinge term weight (default 1.0)")
    p.add_argument("--max-passes", dest="max_passes", type=int, help="solver sweep cap (default 10000)")
    p.add_argument("--tol", type=float, help="objective-change stop (default 1e-6)")
    p.add_argument("--median-anchor", dest="median_anchor", choices=["sample", "midpoint"], help="median personality source (default sample)")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("recommend", help="personal activity ranges for one user")
    add_common(p)
    p.add_argument("--data", required=True, help="input data directory")
    p.add_argument("--model", help="model artifact (or CONGREC_MODEL_PATH)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--user", required=True, help="user id from participants.csv")
    p.add_argument("--step", type=float, help="grid increment (default 0.1)")
    p.add_argument("--lambda", dest="lam", type=float, help="fixed-activity share (default 0.1)")
    p.add_argument("--m", type=int, help="varied-activity count (default: all above the variance threshold)")
    p.add_argument("--variance-threshold", dest="variance_threshold", type=float, help="proportion-std cutoff (default 0.1)")
    p.add_argument("--workers", type=int, help="grid evaluation threads (default 1)")
    p.set_defaults(func=_cmd_recommend)

    p = sub.add_parser("validate", help="containment validation of ranges on a cohort")
    add_common(p)
    p.add_argument("--data", required=True, help="input data directory")
    p.add_argument("--model", help="model artifact (or CONGREC_MODEL_PATH)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--step", type=float, help="grid increment (default 0.1)")
    p.add_argument("--lambda", dest="lam", type=float, help="fixed-activity share (default 0.1)")
    p.add_argument("--m", type=int, help="varied-activity count (default: all above the variance threshold)")
    p.add_argument("--k", type=int, help="majority threshold (default ceil(5m/8))")
    p.add_argument("--variance-threshold", dest="variance_threshold", type=float, help="proportion-std cutoff (default 0.1)")
    p.add_argument("--workers", type=int, help="grid evaluation threads (default 1)")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("serve", help="run the HTTP service")
    add_common(p)
    p.add_argument("--model", help="model artifact (or CONGREC_MODEL_PATH)")
    p.add_argument("--data", required=True, help="directory with taxonomy.json and correlation.csv")
    p.add_argument("--host", default="127.0.0.1", help="bind address (default 127.0.0.1)")
    p.add_argument("--port", type=int, default=8080, help="listen port (default 8080)")
    p.add_argument("--cors-origin", dest="cors_origin", help="comma-separated allowed origins")
    p.add_argument("--step", type=float, help="default grid increment (default 0.1)")
    p.add_argument("--lambda", dest="lam", type=float, help="default fixed-activity share (default 0.1)")
    p.add_argument("--m", type=int, help="default varied-activity count (default: threshold-based)")
    p.add_argument("--variance-threshold", dest="variance_threshold", type=float, help="proportion-std cutoff (default 0.1)")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CongrecError as exc:
        print(json.dumps({"error": exc.category, "message": exc.message}), file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": "io_error", "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
