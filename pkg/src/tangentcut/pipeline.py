"""Run orchestration: configs, trials, sweeps, and file artifacts.

A run directory holds config.json, metrics.json, timings.json, and one
subdirectory per trial with labels.csv and scores.csv.  Everything except
timings.json is byte-identical across repeat runs with the same config; the
per-stage wall clock lives in its own file so the determinism guarantee stays
clean.  All files are written atomically (temp file + rename).
"""

from __future__ import annotations

import itertools
import json
import os
import tempfile
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from time import perf_counter

import numpy as np

from .errors import ConfigError, LengthMismatch
from .evaluation import MetricReport, outlier_f_measure, rand_index
from .geometry import PointCloud
from .spectral import ClusterConfig, ClusterResult, cluster
from .synthetic import GENERATORS, OUTLIER_LABEL, LabeledCloud, make_dataset
from .tangent import WeightConfig

Array = np.ndarray

_ALPHA_NAMES = ("constant", "quadratic", "quartic")


@dataclass
class RunConfig:
    """Flat, serializable description of one clustering experiment.

    ``input`` is a CSV path or a generator spec such as
    ``intersecting_spheres:n_per=1000,noise_sigma=0.03``.  ``outlier`` is
    ``off``, ``auto``, or ``ratio:<float>``.  Trial t runs with seed
    ``seed + t``; generator inputs are redrawn per trial unless the spec pins
    its own ``seed=``.
    """

    input: str = ""
    k: int = 15
    k_sigma: int | None = None
    k_tangent: int | None = None
    d: int | str = 2
    sigma_n: float = 1.0
    sigma_e: float = 1.0
    alpha: str = "quadratic"
    sigma_c: float = 1.0
    n_c: int = 2
    outlier: str = "off"
    kmeans_replicates: int = 100
    seed: int = 0
    trials: int = 1
    input_has_header: bool = False
    input_has_labels: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.d, str) and self.d != "auto":
            try:
                self.d = int(self.d)
            except ValueError:
                raise ConfigError(f"d must be an integer or 'auto', got {self.d!r}") from None
        if self.alpha not in _ALPHA_NAMES:
            raise ConfigError(f"alpha must be one of {_ALPHA_NAMES}, got {self.alpha!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        self.outlier_mode, self.outlier_ratio = _parse_outlier(self.outlier)

    def to_cluster_config(self, seed: int | None = None) -> ClusterConfig:
        return ClusterConfig(
            k=self.k,
            k_sigma=self.k_sigma,
            k_tangent=self.k_tangent,
            dim=self.d,
            weights=WeightConfig(self.sigma_n, self.sigma_e, self.alpha),
            sigma_c=self.sigma_c,
            n_c=self.n_c,
            outlier_mode=self.outlier_mode,
            outlier_ratio=self.outlier_ratio,
            kmeans_replicates=self.kmeans_replicates,
            seed=self.seed if seed is None else seed,
        )

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(mapping) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        coerced = {key: _coerce(key, raw) for key, raw in mapping.items()}
        try:
            return cls(**coerced)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_kv_file(cls, path: str | Path) -> "RunConfig":
        mapping = {}
        for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            mapping[key.strip()] = value.strip()
        return cls.from_mapping(mapping)


_INT_KEYS = {"k", "k_sigma", "k_tangent", "n_c", "kmeans_replicates", "seed", "trials"}
_FLOAT_KEYS = {"sigma_n", "sigma_e", "sigma_c"}
_BOOL_KEYS = {"input_has_header", "input_has_labels"}


def _coerce(key: str, raw):
    if raw is None or not isinstance(raw, str):
        return raw
    try:
        if key in _INT_KEYS:
            return None if raw.lower() == "none" else int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _BOOL_KEYS:
            return raw.lower() in ("1", "true", "yes")
        if key == "d":
            return raw if raw == "auto" else int(raw)
    except ValueError:
        raise ConfigError(f"cannot parse config value {key}={raw!r}") from None
    return raw


def _parse_outlier(spec: str) -> tuple[str, float | None]:
    if spec in ("off", "auto"):
        return spec, None
    if spec.startswith("ratio:"):
        try:
            ratio = float(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad outlier ratio in {spec!r}") from None
        if not 0.0 <= ratio < 1.0:
            raise ConfigError(f"outlier ratio must lie in [0, 1), got {ratio}")
        return "ratio", ratio
    raise ConfigError(f"outlier must be 'off', 'auto', or 'ratio:<float>', got {spec!r}")


# ---------------------------------------------------------------------------
# input resolution


def parse_generator_spec(spec: str) -> tuple[str, dict]:
    """Split ``name:key=value,key=value`` into (name, params)."""
    name, _, tail = spec.partition(":")
    params: dict = {}
    if tail:
        for item in tail.split(","):
            if "=" not in item:
                raise ConfigError(f"bad generator parameter {item!r} in {spec!r}")
            key, value = item.split("=", 1)
            params[key.strip()] = _parse_scalar(value.strip())
    return name.strip(), params


def _parse_scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    if "|" in text:  # tuple syntax, e.g. plane_x=0.5|15.5
        return tuple(_parse_scalar(part) for part in text.split("|"))
    return text


def resolve_input(config: RunConfig, trial_seed: int) -> LabeledCloud:
    """Dataset for one trial: generated fresh or loaded from CSV."""
    spec = config.input
    if not spec:
        raise ConfigError("config.input is empty")
    name = spec.partition(":")[0]
    if name in GENERATORS:
        gen_name, params = parse_generator_spec(spec)
        kwargs = dict(params)
        kwargs.setdefault("seed", trial_seed)   # a seed pinned in the spec wins
        return make_dataset(gen_name, **kwargs)
    return load_cloud_csv(spec, has_header=config.input_has_header, has_labels=config.input_has_labels)


def load_cloud_csv(path: str | Path, has_header: bool = False, has_labels: bool = False) -> LabeledCloud:
    """Dataset CSV: one point per row, D coordinates, optional trailing label.

    Label -1 marks a ground-truth outlier.
    """
    try:
        raw = np.loadtxt(path, delimiter=",", skiprows=1 if has_header else 0, ndmin=2)
    except ValueError as exc:
        raise ConfigError(f"{path}: not a numeric CSV ({exc})") from None
    if has_labels:
        if raw.shape[1] < 2:
            raise ConfigError(f"{path}: need at least one coordinate plus the label column")
        labels = raw[:, -1].astype(np.int64)
        data = raw[:, :-1]
    else:
        labels = np.zeros(len(raw), dtype=np.int64)
        data = raw
    flags = labels == OUTLIER_LABEL
    return LabeledCloud(PointCloud(data), labels, flags, seed=-1)


def save_cloud_csv(dataset: LabeledCloud, path: str | Path) -> None:
    """Write a dataset CSV with header x0..x{D-1},label."""
    dim = dataset.cloud.dim_ambient
    lines = [",".join([f"x{i}" for i in range(dim)] + ["label"])]
    for row, lab in zip(dataset.cloud.data, dataset.labels):
        lines.append(",".join(repr(float(v)) for v in row) + f",{int(lab)}")
    _write_text_atomic(Path(path), "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# artifacts


def _write_text_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json_atomic(path: Path, payload: dict) -> None:
    _write_text_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_labels_csv(path: Path, labels: Array) -> None:
    lines = ["point_index,label"]
    lines += [f"{i},{int(lab)}" for i, lab in enumerate(labels)]
    _write_text_atomic(path, "\n".join(lines) + "\n")


def _write_scores_csv(path: Path, scores: Array) -> None:
    lines = ["point_index,pi_score"]
    lines += [f"{i},{repr(float(s))}" for i, s in enumerate(scores)]
    _write_text_atomic(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# trials


def _trial_metrics(dataset: LabeledCloud, result: ClusterResult, config: RunConfig) -> dict:
    out: dict = {}
    truth = dataset.labels
    has_truth = config.input_has_labels or dataset.seed != -1
    if has_truth:
        inlier_truth = ~dataset.outlier_flags
        out["rand"] = rand_index(truth[inlier_truth], result.labels[inlier_truth])
        if dataset.outlier_flags.any() and config.outlier_mode != "off":
            out["f_measure"] = outlier_f_measure(~result.inlier_mask, dataset.outlier_flags)
    return out


def run_trials(config: RunConfig, timings: dict | None = None) -> tuple[list[ClusterResult], list[dict], list[LabeledCloud]]:
    """Execute ``config.trials`` independent trials (seed + t each)."""
    results: list[ClusterResult] = []
    metrics: list[dict] = []
    datasets: list[LabeledCloud] = []
    for t in range(config.trials):
        trial_seed = config.seed + t
        dataset = resolve_input(config, trial_seed)
        result = cluster(dataset.cloud, config.to_cluster_config(seed=trial_seed), timings=timings)
        results.append(result)
        metrics.append(_trial_metrics(dataset, result, config))
        datasets.append(dataset)
    return results, metrics, datasets


def _summary(metrics: list[dict]) -> dict:
    rand_values = [m["rand"] for m in metrics if "rand" in m]
    f_values = [m["f_measure"] for m in metrics if "f_measure" in m]
    report = MetricReport(rand_values, f_values or None) if rand_values else None
    out: dict = {"per_trial": metrics}
    if report is not None:
        out.update(report.as_dict())
    return out


def run_cluster(config: RunConfig, out_dir: str | Path, write_timings: bool = False) -> dict:
    """Run all trials, write artifacts, and return the metrics summary.

    Every artifact is a pure function of the config, so re-running reproduces
    the directory bitwise.  Per-stage wall clock is the one exception; it is
    only written (to timings.json) when asked for.
    """
    out_dir = Path(out_dir)
    timings: dict = {}
    t0 = perf_counter()
    results, metrics, _ = run_trials(config, timings=timings)
    timings["total"] = perf_counter() - t0

    for t, result in enumerate(results):
        trial_dir = out_dir / f"trial_{t:03d}"
        _write_labels_csv(trial_dir / "labels.csv", result.labels)
        _write_scores_csv(trial_dir / "scores.csv", result.scores)

    summary = _summary(metrics)
    payload = {"config": config.as_dict(), "metrics": summary}
    _write_json_atomic(out_dir / "config.json", config.as_dict())
    _write_json_atomic(out_dir / "metrics.json", payload)
    if write_timings:
        _write_json_atomic(out_dir / "timings.json", {"seconds": timings})
    return payload


# ---------------------------------------------------------------------------
# sweep

_SWEEPABLE = {"k", "k_sigma", "k_tangent", "sigma_c", "sigma_n", "sigma_e", "n_c", "alpha", "d"}


def run_sweep(
    base: RunConfig,
    grid: dict[str, list],
    out_dir: str | Path,
    selection_trials: int = 5,
    eval_trials: int = 50,
) -> dict:
    """Select the best grid point on short trials, then evaluate it fresh.

    Selection runs ``selection_trials`` trials per grid point with seeds
    ``base.seed + t`` and ranks by mean Rand index (ties: smaller k, then
    smaller sigma_c).  Evaluation reruns the winner for ``eval_trials`` trials
    with seeds starting at ``base.seed + selection_trials``, exactly as
    ``run_cluster`` would.
    """
    out_dir = Path(out_dir)
    bad = set(grid) - _SWEEPABLE
    if bad:
        raise ConfigError(f"cannot sweep over {sorted(bad)}; allowed: {sorted(_SWEEPABLE)}")
    if not grid:
        raise ConfigError("sweep grid is empty")
    generated = base.input.partition(":")[0] in GENERATORS
    if not (generated or base.input_has_labels):
        raise ConfigError("sweep needs ground-truth labels to rank grid points")

    keys = sorted(grid)
    rows = []
    for combo in itertools.product(*(grid[key] for key in keys)):
        point = dict(zip(keys, combo))
        row: dict = {"params": point}
        try:
            candidate = replace(base, trials=selection_trials, **point)
            _, metrics, _ = run_trials(candidate)
            rand_values = [m["rand"] for m in metrics]
            row["rand_mean"] = float(np.mean(rand_values))
            row["rand_values"] = rand_values
        except Exception as exc:  # a bad grid point must not sink the sweep
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)

    scored = [row for row in rows if "rand_mean" in row]
    if not scored:
        raise ConfigError(f"every grid point failed; first error: {rows[0]['error']}")

    def rank(row: dict):
        params = row["params"]
        return (-row["rand_mean"], params.get("k", base.k), params.get("sigma_c", base.sigma_c))

    best = min(scored, key=rank)
    chosen = replace(base, trials=eval_trials, seed=base.seed + selection_trials, **best["params"])
    eval_payload = run_cluster(chosen, out_dir / "eval")

    report = {
        "grid_keys": keys,
        "selection_trials": selection_trials,
        "eval_trials": eval_trials,
        "selection": rows,
        "best_params": best["params"],
        "evaluation": eval_payload["metrics"],
        "chosen_config": chosen.as_dict(),
    }
    _write_json_atomic(out_dir / "report.json", report)
    return report


# ---------------------------------------------------------------------------
# export


def export_arrays(points: Array, labels: Array, scores: Array | None, out_dir: str | Path) -> None:
    """Plot-friendly CSVs: coordinates with labels, and with outlier scores.

    points_labels.csv: point_index,x0..x{D-1},label
    points_scores.csv: point_index,x0..x{D-1},pi_score (only when scores given)
    """
    out_dir = Path(out_dir)
    if len(points) != len(labels) or (scores is not None and len(scores) != len(points)):
        raise LengthMismatch("points, labels, and scores must be index-aligned")
    coord_header = ",".join(f"x{i}" for i in range(points.shape[1]))

    lines = [f"point_index,{coord_header},label"]
    for i, (row, lab) in enumerate(zip(points, labels)):
        coords = ",".join(repr(float(v)) for v in row)
        lines.append(f"{i},{coords},{int(lab)}")
    _write_text_atomic(out_dir / "points_labels.csv", "\n".join(lines) + "\n")

    if scores is None:
        return
    lines = [f"point_index,{coord_header},pi_score"]
    for i, (row, score) in enumerate(zip(points, scores)):
        coords = ",".join(repr(float(v)) for v in row)
        lines.append(f"{i},{coords},{repr(float(score))}")
    _write_text_atomic(out_dir / "points_scores.csv", "\n".join(lines) + "\n")


def export_plot_data(
    result: ClusterResult,
    cloud: PointCloud,
    out_dir: str | Path,
    include_scores: bool = True,
) -> None:
    """Export one clustering result next to its coordinates."""
    scores = result.scores if include_scores else None
    export_arrays(cloud.data, result.labels, scores, out_dir)
