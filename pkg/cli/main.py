"""
Command-line entry point.

    python -m cli.main <command> [--config run.conf] [--data flows.csv] ...

Commands: generate | train | eval | ablate | gridsearch | sensitivity | predict.
Exit codes: 0 success, 1 usage/configuration, 2 data, 3 numeric failure.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional, get_type_hints

import pandas as pd

import mamnet
from cli.checkpoint import load_checkpoint, save_checkpoint
from cli.config import RunConfig, config_hash, convert_value, parse_config, parse_synth_spec, render_config
from datapipe import reference_spec
from errors import MamNetError, UsageError, exit_code_for
from evaluation import (
    format_ci,
    format_table,
    grid_search,
    run_ablation,
    sensitivity_sweep,
    write_grid,
    write_report,
    write_run_metrics,
    write_sweep,
)


class _Parser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(message, stage="cli")


def parse_seeds(text: str) -> List[int]:
    """'1,2,3' or '1..5'."""
    try:
        if ".." in text:
            first, last = text.split("..", 1)
            return list(range(int(first), int(last) + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"cannot parse seeds '{text}'", stage="cli")


def parse_grid(text: str) -> Dict[str, List[Any]]:
    """'state_dim=1,16;spectral_bins=1,8' -> {'state_dim': [1, 16], 'spectral_bins': [1, 8]}."""
    types = get_type_hints(RunConfig)
    grid: Dict[str, List[Any]] = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        key, sep, values = part.partition("=")
        key = key.strip()
        if not sep or key not in types:
            raise UsageError(f"bad grid entry '{part}'", stage="cli")
        try:
            grid[key] = [convert_value(types[key], v.strip()) for v in values.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"cannot parse grid values for '{key}'", stage="cli")
    return grid


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mamnet", description="SSM + spectral network traffic anomaly detector")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")
    parser.add_argument("--quiet", action="store_true", help="No progress bars")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--config", help="Flat key = value run config")
        sub.add_argument("--seed", type=int, help="Seed for this run (default from config, 42)")
        return sub

    generate = command("generate", "Write a synthetic flow CSV and its spec sidecar")
    generate.add_argument("--out", help="CSV path (default <output_dir>/synthetic.csv)")

    train = command("train", "Train a model, write a checkpoint and loss trace")
    train.add_argument("--data")
    train.add_argument("--out", help="Checkpoint path (default <output_dir>/model.ckpt)")

    evaluate = command("eval", "Metrics on the held-out split")
    evaluate.add_argument("--data")
    evaluate.add_argument("--model", help="Evaluate this checkpoint instead of training one")
    evaluate.add_argument("--report")

    ablate = command("ablate", "Every variant under every seed, with CIs and Welch p-values")
    ablate.add_argument("--data")
    ablate.add_argument("--seeds", help="'1,2,3' or '1..5'")
    ablate.add_argument("--report")

    grid = command("gridsearch", "Hyperparameter grid search on a validation slice")
    grid.add_argument("--data")
    grid.add_argument("--grid", required=True, help="'key=v1,v2;key2=v3,v4'")
    grid.add_argument("--report")

    sweep = command("sensitivity", "Vary one setting across seeds")
    sweep.add_argument("--data")
    sweep.add_argument("--key", required=True)
    sweep.add_argument("--values", required=True, help="Comma-separated values")
    sweep.add_argument("--seeds")
    sweep.add_argument("--report")

    predict = command("predict", "Per-window scores from a checkpoint")
    predict.add_argument("--data")
    predict.add_argument("--model", required=True)
    predict.add_argument("--out")
    predict.add_argument("--latency", type=int, default=mamnet.LATENCY_WINDOWS, help="Windows to time (0 = skip)")
    return parser


def load_run_config(args) -> RunConfig:
    config = parse_config(args.config) if args.config else RunConfig()
    overrides: Dict[str, Any] = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "seeds", None):
        overrides["seeds"] = parse_seeds(args.seeds)
    return config.with_values(**overrides).validate() if overrides else config


def echo_config(config: RunConfig) -> str:
    run_hash = config_hash(config)
    print(f"🔹 Effective config (hash {run_hash}):")
    for line in render_config(config).splitlines():
        print(f"   {line}")
    return run_hash


def cmd_generate(args, config: RunConfig, run_hash: str, progress: bool) -> None:
    spec = parse_synth_spec(config.synth_spec_path) if config.synth_spec_path else reference_spec(config.seed)
    csv_path, sidecar = mamnet.write_generated(spec, mamnet.output_path(config, args.out, "synthetic.csv"), run_hash)
    print(f"✅ Wrote {csv_path}")
    print(f"✅ Wrote {sidecar}")


def cmd_train(args, config: RunConfig, run_hash: str, progress: bool) -> None:
    table = mamnet.load_dataset(config, args.data)
    checkpoint, trace, result = mamnet.train_from_table(table, config, config.seed, progress)
    path = save_checkpoint(mamnet.output_path(config, args.out, "model.ckpt"), checkpoint)
    trace_path = path.with_name(path.name + ".loss.csv")
    frame = pd.DataFrame({"epoch": range(1, len(trace) + 1), "loss": trace})
    frame["config_hash"] = run_hash
    frame.to_csv(trace_path, index=False, float_format="%.17g")
    print(f"✅ Checkpoint: {path}")
    print(f"✅ Loss trace: {trace_path}")
    for name, value in result.metrics.items():
        print(f"📊 test {name}: {format_ci(value, None, None, name)}")


def cmd_eval(args, config: RunConfig, run_hash: str, progress: bool) -> None:
    table = mamnet.load_dataset(config, args.data)
    if args.model:
        result = mamnet.evaluate_checkpoint(load_checkpoint(args.model), table)
    else:
        _, _, result = mamnet.train_from_table(table, config, config.seed, progress)
    paths = write_run_metrics(result, mamnet.output_path(config, args.report, "eval.csv"), run_hash)
    for name, value in result.metrics.items():
        print(f"📊 {name}: {format_ci(value, None, None, name)}")
    for tag, group in result.groups.items():
        print(f"   {tag}: f1 {format_ci(group['f1'], None, None)} recall {format_ci(group['recall'], None, None)}")
    print(f"✅ Report: {paths[0]}")


def cmd_ablate(args, config: RunConfig, run_hash: str, progress: bool) -> None:
    table = mamnet.load_dataset(config, args.data)
    report = run_ablation(table, config.experiment(), config.seeds, config.variants, run_hash, progress)
    paths = write_report(report, mamnet.output_path(config, args.report, "ablation.csv"))
    print(format_table(report))
    for variant, reason in report.failed.items():
        print(f"⚠️ {variant} failed: {reason}")
    print(f"✅ Report: {paths[0]}")


def cmd_gridsearch(args, config: RunConfig, run_hash: str, progress: bool) -> None:
    table = mamnet.load_dataset(config, args.data)
    result = grid_search(table, config.experiment(), parse_grid(args.grid), seed=config.seed, progress=progress)
    path = write_grid(result, mamnet.output_path(config, args.report, "grid.csv"), run_hash)
    best = config.with_values(**result.best_values)
    best_path = path.with_name(path.name + ".best.conf")
    best_path.write_text(f"# config_hash {config_hash(best)}\n" + render_config(best), encoding="utf-8")
    print(f"📊 Best {result.metric}: {result.best_values}")
    print(f"✅ Scores: {path}")
    print(f"✅ Best config: {best_path}")


def cmd_sensitivity(args, config: RunConfig, run_hash: str, progress: bool) -> None:
    table = mamnet.load_dataset(config, args.data)
    grid = parse_grid(f"{args.key}={args.values}")
    rows = sensitivity_sweep(table, config.experiment(), args.key, grid[args.key], config.seeds, progress)
    path = write_sweep(rows, mamnet.output_path(config, args.report, "sensitivity.csv"), run_hash, config.seeds)
    for row in rows:
        print(f"📊 {row.key}={row.value}: {row.metric} {format_ci(row.mean, row.ci_low, row.ci_high, row.metric)}")
    print(f"✅ Report: {path}")


def cmd_predict(args, config: RunConfig, run_hash: str, progress: bool) -> None:
    checkpoint = load_checkpoint(args.model)
    table = mamnet.load_dataset(checkpoint.run_config, args.data)
    windows, scores, labels = mamnet.predict_table(checkpoint, table)
    frame = pd.DataFrame({"start": windows.starts, "score": scores})
    if labels is not None:
        frame["label"] = labels
    frame["config_hash"] = config_hash(checkpoint.run_config)
    path = mamnet.output_path(config, args.out, "scores.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g")
    print(f"✅ Scored {len(windows)} windows: {path}")
    if args.latency > 0:
        stats = mamnet.measure_latency(
            checkpoint.params, checkpoint.model_config, windows.windows, limit=args.latency, progress=progress
        )
        marker = "✅" if stats.within_target else "⚠️"
        print(
            f"{marker} Latency: mean {stats.mean_ms:.3f} ms, p50 {stats.p50_ms:.3f} ms, "
            f"p95 {stats.p95_ms:.3f} ms over {stats.windows} windows (target < {mamnet.LATENCY_TARGET_MS:.0f} ms)"
        )


HANDLERS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "gridsearch": cmd_gridsearch,
    "sensitivity": cmd_sensitivity,
    "predict": cmd_predict,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.WARNING,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
        config = load_run_config(args)
        run_hash = echo_config(config)
        progress = not args.quiet and sys.stderr.isatty()
        HANDLERS[args.command](args, config, run_hash, progress)
        return 0
    except MamNetError as e:
        print(f"❌ {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
