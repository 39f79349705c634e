"""Command-line entry point.

Subcommands:
    generate  dataset spec -> CSV file
    cluster   config -> run directory (labels, scores, metrics, config)
    sweep     base config + grid JSON -> selection report and evaluation run
    export    run directory -> plot-ready CSVs

Configuration comes from a flat key=value file (--config), from flags, or
both; flags win.  Exit codes: 0 success, 2 config error, 3 numeric or stage
failure, 4 I/O error.  A failure prints a single-line JSON error record to
stderr and, when an output directory is known, writes the same record to
<out>/error.json.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import pipeline
from .errors import ConfigError, InvalidGeometry, InvalidK, TangentcutError
from .pipeline import RunConfig
from .synthetic import GENERATORS, make_dataset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3
EXIT_IO = 4

_CONFIG_ERRORS = (ConfigError, InvalidK, InvalidGeometry)


def _emit_error(exc: BaseException, exit_code: int, out_dir: str | None) -> int:
    record = {
        "error": {
            "type": type(exc).__name__,
            "message": str(exc),
            "exit_code": exit_code,
        }
    }
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    if out_dir is not None:
        try:
            path = Path(out_dir)
            path.mkdir(parents=True, exist_ok=True)
            path.joinpath("error.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
        except OSError:
            pass
    return exit_code


# ---------------------------------------------------------------------------
# config assembly

_FLAG_HELP = {
    "input": "CSV path or generator spec name:key=value,... (required)",
    "k": "neighborhood size (default: 15)",
    "k_sigma": "bandwidth neighbor rank, or 'none' for min(7, k) (default: none)",
    "k_tangent": "neighborhood size for tangent frames, or 'none' to reuse k (default: none)",
    "d": "intrinsic dimension, integer or 'auto' (default: 2)",
    "sigma_n": "noise deviation in the tangent weights (default: 1.0)",
    "sigma_e": "Taylor-error deviation in the tangent weights (default: 1.0)",
    "alpha": "error growth kernel: constant, quadratic, or quartic (default: quadratic)",
    "sigma_c": "curvature kernel scale (default: 1.0)",
    "n_c": "number of clusters (default: 2)",
    "outlier": "off, auto, or ratio:<float> (default: off)",
    "kmeans_replicates": "k-means restarts (default: 100)",
    "seed": "base seed; trial t uses seed + t (default: 0)",
    "trials": "number of trials (default: 1)",
    "input_has_header": "input CSV starts with a header row (default: no)",
    "input_has_labels": "input CSV has a trailing ground-truth label column (default: no)",
}

_FLAG_NAMES = {
    "input_has_header": "--header",
    "input_has_labels": "--has-labels",
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="flat key=value config file")
    group = parser.add_argument_group("config overrides")
    for field, help_text in _FLAG_HELP.items():
        flag = _FLAG_NAMES.get(field, "--" + field.replace("_", "-"))
        if field in ("input_has_header", "input_has_labels"):
            group.add_argument(flag, dest=field, action=argparse.BooleanOptionalAction, default=None, help=help_text)
        else:
            group.add_argument(flag, dest=field, default=None, help=help_text)


def _collect_config(args: argparse.Namespace, extra: dict | None = None) -> RunConfig:
    mapping: dict = {}
    if extra:
        mapping.update(extra)
    if args.config:
        mapping.update(RunConfig.from_kv_file(args.config).as_dict())
    for field in RunConfig.__dataclass_fields__:
        value = getattr(args, field, None)
        if value is not None:
            mapping[field] = value
    if not mapping.get("input"):
        raise ConfigError("no input given; use --input or an input= line in the config file")
    return RunConfig.from_mapping(mapping)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_generate(args: argparse.Namespace) -> int:
    name, params = pipeline.parse_generator_spec(args.spec)
    if name not in GENERATORS:
        raise ConfigError(f"unknown generator {name!r}; available: {sorted(GENERATORS)}")
    dataset = make_dataset(name, seed=args.seed, **params)
    pipeline.save_cloud_csv(dataset, args.out)
    print(f"wrote {dataset.cloud.n} points to {args.out}")
    return EXIT_OK


def _cmd_cluster(args: argparse.Namespace) -> int:
    config = _collect_config(args)
    payload = pipeline.run_cluster(config, args.out, write_timings=args.timings)
    print(json.dumps(payload["metrics"], sort_keys=True, default=str))
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    try:
        raw = json.loads(Path(args.grid).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.grid}: invalid JSON ({exc})") from None
    base_extra = {}
    if isinstance(raw, dict) and "grid" in raw:
        grid = raw["grid"]
        base_extra = raw.get("base", {})
    else:
        grid = raw
    if not isinstance(grid, dict) or not all(isinstance(v, list) for v in grid.values()):
        raise ConfigError(f"{args.grid}: expected an object mapping parameter names to value lists")
    base = _collect_config(args, extra=base_extra)
    report = pipeline.run_sweep(
        base,
        grid,
        args.out,
        selection_trials=args.selection_trials,
        eval_trials=args.eval_trials,
    )
    print(json.dumps({"best_params": report["best_params"], "evaluation": report["evaluation"]}, sort_keys=True))
    return EXIT_OK


def _cmd_export(args: argparse.Namespace) -> int:
    run_dir = Path(args.run)
    config_path = run_dir / "config.json"
    if not config_path.exists():
        raise FileNotFoundError(f"no config.json under {run_dir}")
    config = RunConfig.from_mapping(json.loads(config_path.read_text()))
    if not 0 <= args.trial < config.trials:
        raise ConfigError(f"trial {args.trial} out of range; run has {config.trials} trials")
    trial_dir = run_dir / f"trial_{args.trial:03d}"

    dataset = pipeline.resolve_input(config, config.seed + args.trial)
    labels_raw = np.loadtxt(trial_dir / "labels.csv", delimiter=",", skiprows=1, ndmin=2)
    order = np.argsort(labels_raw[:, 0])
    labels = labels_raw[order, 1].astype(np.int64)
    scores = None
    if config.outlier_mode != "off":
        scores_raw = np.loadtxt(trial_dir / "scores.csv", delimiter=",", skiprows=1, ndmin=2)
        scores = scores_raw[np.argsort(scores_raw[:, 0]), 1]
    pipeline.export_arrays(dataset.cloud.data, labels, scores, args.out)
    print(f"exported trial {args.trial} of {run_dir} to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tangentcut",
        description="Multiple-manifold clustering with curvature-aware similarities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="write a synthetic dataset CSV")
    p_gen.add_argument("spec", help="generator spec, e.g. nested_spheres:n_per=500,noise_sigma=0.03")
    p_gen.add_argument("--out", required=True, help="output CSV path")
    p_gen.add_argument("--seed", type=int, default=0, help="generator seed (default: 0)")
    p_gen.set_defaults(func=_cmd_generate)

    p_cluster = sub.add_parser("cluster", help="run the clustering pipeline")
    _add_config_flags(p_cluster)
    p_cluster.add_argument("--out", required=True, help="output run directory")
    p_cluster.add_argument("--timings", action="store_true", help="also write per-stage wall clock to timings.json")
    p_cluster.set_defaults(func=_cmd_cluster)

    p_sweep = sub.add_parser("sweep", help="grid-search parameters, then evaluate the best")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--grid", required=True, metavar="FILE", help="JSON file: {param: [values...]} or {base: {...}, grid: {...}}")
    p_sweep.add_argument("--out", required=True, help="output directory (report.json + eval run)")
    p_sweep.add_argument("--selection-trials", type=int, default=5, help="trials per grid point (default: 5)")
    p_sweep.add_argument("--eval-trials", type=int, default=50, help="trials for the chosen config (default: 50)")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_export = sub.add_parser("export", help="turn a run directory into plot-ready CSVs")
    p_export.add_argument("--run", required=True, help="run directory written by cluster")
    p_export.add_argument("--trial", type=int, default=0, help="trial index to export (default: 0)")
    p_export.add_argument("--out", required=True, help="output directory for the CSVs")
    p_export.set_defaults(func=_cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out_dir = getattr(args, "out", None)
    if args.command == "generate":
        out_dir = None  # --out is a file there, not a directory
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        return _emit_error(exc, EXIT_CONFIG, out_dir)
    except OSError as exc:
        return _emit_error(exc, EXIT_IO, out_dir)
    except (TangentcutError, np.linalg.LinAlgError, ValueError, ArithmeticError) as exc:
        return _emit_error(exc, EXIT_STAGE, out_dir)


if __name__ == "__main__":
    sys.exit(main())
