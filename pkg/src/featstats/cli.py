"""Command-line interface wiring the library modules together.

Subcommands: stats, eval, correlate, stopcheck, rank, synth, report.
Exit codes: 0 success (stopcheck: stability reached), 1 stopcheck found no
stable window, 2 user/input error.

Every option can also come from a JSON config file (``--config``) whose
keys match the flag names with dashes as underscores; explicit flags win
over the config, the config wins over built-in defaults.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

from . import analysis, caption_metrics, feature_stats, report, synthgen, tensor_store
from .errors import FeatstatsError
from .feature_stats import TimeMode
from .moments import KurtosisKind, SkewnessKind, StatDefinition

EXIT_OK = 0
EXIT_NO_STOP = 1
EXIT_ERROR = 2

_KURTOSIS_TOKENS = {k.value: k for k in KurtosisKind}
_SKEWNESS_TOKENS = {s.value: s for s in SkewnessKind}


def parse_definition(text: str) -> StatDefinition:
    """Comma-separated estimator tokens, one per statistic.

    Kurtosis: fisher (default) | pearson-beta2. Skewness: biased (default)
    | sample-std.  Example: "pearson-beta2,sample-std".
    """
    kurtosis = KurtosisKind.FISHER
    skewness = SkewnessKind.BIASED
    for token in filter(None, (t.strip() for t in text.split(","))):
        if token in _KURTOSIS_TOKENS:
            kurtosis = _KURTOSIS_TOKENS[token]
        elif token in _SKEWNESS_TOKENS:
            skewness = _SKEWNESS_TOKENS[token]
        else:
            raise FeatstatsError(
                f"unknown definition token {token!r}; choose from "
                f"{sorted(_KURTOSIS_TOKENS)} / {sorted(_SKEWNESS_TOKENS)}")
    return StatDefinition(kurtosis, skewness)


def _parse_dims(text: str) -> tuple[int, int, int]:
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise FeatstatsError(f"dims must look like TxBxC, got {text!r}")
    t, b, c = (int(p) for p in parts)
    return t, b, c


def _write_output(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump_json(obj, out: str | None):
    _write_output(json.dumps(obj, indent=2) + "\n", out)


# ---------------------------------------------------------------------------
# subcommands


def cmd_stats(args) -> int:
    manifest = tensor_store.load_manifest(args.manifest)
    definition = parse_definition(args.definition)
    trajectory = feature_stats.run_trajectory(manifest, definition,
                                              TimeMode(args.time_mode))
    buf = io.StringIO()
    feature_stats.write_stats_csv(trajectory, buf)
    _write_output(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    with open(args.corpus, encoding="utf-8") as fh:
        corpus = caption_metrics.load_corpus(fh)
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    spice = None
    if args.spice:
        spice = {str(k): float(v)
                 for k, v in json.loads(Path(args.spice).read_text()).items()}
    result = caption_metrics.score_corpus(corpus, metrics, spice)
    payload: dict = dict(result.scores)
    if result.diagnostics:
        payload["diagnostics"] = result.diagnostics
    _dump_json(payload, args.out)
    return EXIT_OK


def _load_stats(path) -> list[feature_stats.EpochStat]:
    with open(path, encoding="utf-8") as fh:
        return feature_stats.read_stats_csv(fh)


def cmd_correlate(args) -> int:
    rows = _load_stats(args.stats_csv)
    with open(args.scores_csv, encoding="utf-8") as fh:
        scores = analysis.read_scores_csv(fh)
    if args.metric not in scores:
        raise FeatstatsError(f"scores CSV has no column {args.metric!r}")
    trajectory = feature_stats.StatTrajectory(rows)
    results = analysis.correlate_run(trajectory, scores[args.metric], args.method)
    payload = {
        stat: {res.method: res.coefficient, "n_points": res.n_points}
        for stat, res in results.items()
    }
    _dump_json(payload, args.out)
    return EXIT_OK


def cmd_stopcheck(args) -> int:
    rows = _load_stats(args.stats_csv)
    decision = analysis.stop_check_series(
        [r.kurtosis for r in rows], [r.skewness for r in rows],
        epsilon=args.epsilon, window=args.window)
    payload: dict = {"stop": decision.should_stop,
                     "window": decision.window, "epsilon": decision.epsilon}
    if decision.should_stop:
        payload["epoch"] = rows[decision.stop_epoch].epoch
        payload["index"] = decision.stop_epoch
    _dump_json(payload, args.out)
    return EXIT_OK if decision.should_stop else EXIT_NO_STOP


def cmd_rank(args) -> int:
    definition = parse_definition(args.definition)
    tagged = []
    for path in args.manifests:
        manifest = tensor_store.load_manifest(path)
        trajectory = feature_stats.run_trajectory(manifest, definition,
                                                  TimeMode(args.time_mode))
        tagged.append((trajectory.encoder_tag, Path(path).parent.name, trajectory))
    # runs sharing an encoder tag are told apart by their directory
    counts = {}
    for tag, _, _ in tagged:
        counts[tag] = counts.get(tag, 0) + 1
    candidates = []
    for tag, parent, trajectory in tagged:
        if not tag or counts[tag] > 1:
            tag = f"{tag or 'run'}:{parent}"
        candidates.append((tag, trajectory))
    at = args.at if args.at in ("final", "best") else int(args.at)
    ranking = analysis.rank_models(candidates, statistic=args.statistic, at=at)
    payload = {
        "statistic": ranking.statistic,
        "ranking": [{"encoder": tag, "value": value} for tag, value in ranking.entries],
    }
    _dump_json(payload, args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = synthgen.TrajectorySpec.from_dict(
        json.loads(Path(args.spec).read_text(encoding="utf-8")))
    manifest = synthgen.generate_run(spec, dims=_parse_dims(args.dims),
                                     out_dir=args.out_dir,
                                     encoder_tag=args.encoder_tag)
    sys.stdout.write(f"wrote {len(manifest.entries)} epochs to {args.out_dir}\n")
    return EXIT_OK


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    manifest = tensor_store.load_manifest(run_dir / "manifest.jsonl")
    definition = parse_definition(args.definition)
    trajectory = feature_stats.run_trajectory(manifest, definition,
                                              TimeMode(args.time_mode))

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = report.ReportBundle(out_dir)

    buf = io.StringIO()
    feature_stats.write_stats_csv(trajectory, buf)
    bundle.add("stats_csv", "stats.csv", buf.getvalue())

    scores = manifest.score_series(args.metric)
    epochs = trajectory.epochs()
    score_series = [scores[e] for e in epochs] if all(e in scores for e in epochs) \
        else None

    bundle.add("metrics_json", "metrics.json",
               json.dumps({args.metric: scores}, indent=2) + "\n")

    if len(scores) >= 2:
        results = analysis.correlate_run(trajectory, scores, args.method)
        payload = {stat: {res.method: res.coefficient, "n_points": res.n_points}
                   for stat, res in results.items()}
        bundle.add("correlation_json", "correlation.json",
                   json.dumps(payload, indent=2) + "\n")

    bundle.add("kurtosis_svg", "kurtosis.svg", report.line_chart_svg(
        epochs, list(trajectory.kurtosis_series()), "kurtosis",
        score_series, args.metric))
    bundle.add("skewness_svg", "skewness.svg", report.line_chart_svg(
        epochs, list(trajectory.skewness_series()), "skewness",
        score_series, args.metric))
    bundle.write_index()
    sys.stdout.write(f"report written to {out_dir}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="featstats",
        description="Profile kurtosis/skewness of encoder feature tensors, "
                    "score captions, and analyze statistic-vs-score runs.")
    sub = parser.add_subparsers(dest="command", required=True)

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config",
                        help="JSON file supplying any of this command's options")
    shared.add_argument("--out")

    stat_opts = argparse.ArgumentParser(add_help=False)
    stat_opts.add_argument("--definition",
                           help="estimator tokens, e.g. 'pearson-beta2' or "
                                "'pearson-beta2,sample-std'")
    stat_opts.add_argument("--time-mode", choices=[m.value for m in TimeMode])

    def command(name, fn, defaults, parents, help):
        p = sub.add_parser(name, parents=parents, help=help)
        p.set_defaults(fn=fn, _defaults=defaults)
        return p

    stat_defaults = {"definition": "fisher,biased", "time_mode": "per-frame",
                     "out": None}

    p = command("stats", cmd_stats, stat_defaults, [shared, stat_opts],
                help="per-epoch kurtosis/skewness CSV from a run manifest")
    p.add_argument("manifest")

    p = command("eval", cmd_eval,
                {"metrics": ",".join(caption_metrics.ALL_METRICS),
                 "spice": None, "out": None},
                [shared], help="score a caption corpus (JSONL)")
    p.add_argument("corpus")
    p.add_argument("--metrics")
    p.add_argument("--spice", help="JSON file {item_id: spice score}")

    p = command("correlate", cmd_correlate,
                {"method": "spearman", "metric": "spider", "out": None},
                [shared], help="correlate stats CSV against scores CSV")
    p.add_argument("stats_csv")
    p.add_argument("scores_csv")
    p.add_argument("--method", choices=["pearson", "spearman"])
    p.add_argument("--metric")

    p = command("stopcheck", cmd_stopcheck,
                {"epsilon": 0.05, "window": 5, "out": None}, [shared],
                help="exit 0 when both statistics are stable, 1 otherwise")
    p.add_argument("stats_csv")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--window", type=int)

    p = command("rank", cmd_rank,
                dict(stat_defaults, statistic="combined", at="final"),
                [shared, stat_opts], help="rank runs by their feature statistics")
    p.add_argument("manifests", nargs="+")
    p.add_argument("--statistic", choices=["kurtosis", "skewness", "combined"])
    p.add_argument("--at", help="'final', 'best', or an epoch index")

    p = command("synth", cmd_synth,
                {"dims": "8x12x64", "out_dir": "synth_run",
                 "encoder_tag": "synth", "out": None},
                [shared], help="generate a synthetic run from a spec JSON")
    p.add_argument("spec")
    p.add_argument("--dims", help="TxBxC")
    p.add_argument("--out-dir")
    p.add_argument("--encoder-tag")

    p = command("report", cmd_report,
                dict(stat_defaults, out_dir="report", metric="spider",
                     method="spearman"),
                [shared, stat_opts],
                help="stats CSV + correlation + SVG charts for a run dir")
    p.add_argument("run_dir")
    p.add_argument("--out-dir")
    p.add_argument("--metric")
    p.add_argument("--method", choices=["pearson", "spearman"])

    return parser


def _apply_config(args) -> None:
    """Explicit flags beat the config file; the config beats defaults."""
    config = {}
    if getattr(args, "config", None):
        loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(loaded, dict):
            raise FeatstatsError("config file must hold a JSON object")
        config = {str(k).replace("-", "_"): v for k, v in loaded.items()}
        unknown = set(config) - set(args._defaults)
        if unknown:
            raise FeatstatsError(
                f"config keys {sorted(unknown)} not valid for this command; "
                f"choose from {sorted(args._defaults)}")
    for key, default in args._defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, config.get(key, default))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _apply_config(args)
        return args.fn(args)
    except (FeatstatsError, OSError, json.JSONDecodeError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
