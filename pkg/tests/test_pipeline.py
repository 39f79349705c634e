"""RunConfig parsing, trial orchestration, artifacts, sweeps, export."""

import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from tangentcut.errors import ConfigError, LengthMismatch
from tangentcut.pipeline import (
    RunConfig,
    export_arrays,
    export_plot_data,
    load_cloud_csv,
    parse_generator_spec,
    resolve_input,
    run_cluster,
    run_sweep,
    run_trials,
    save_cloud_csv,
)
from tangentcut.synthetic import gen_nested_spheres, make_dataset

SPHERES = "nested_spheres:n_per=60,noise_sigma=0.05"


def tree_bytes(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


class TestRunConfig:
    def test_defaults_valid(self):
        config = RunConfig(input=SPHERES)
        assert config.outlier_mode == "off"
        assert config.outlier_ratio is None

    def test_outlier_parsing(self):
        assert RunConfig(input=SPHERES, outlier="auto").outlier_mode == "auto"
        ratio = RunConfig(input=SPHERES, outlier="ratio:0.05")
        assert ratio.outlier_mode == "ratio"
        assert ratio.outlier_ratio == pytest.approx(0.05)
        for bad in ("ratio:nope", "ratio:1.0", "ratio:-0.1", "percentile"):
            with pytest.raises(ConfigError):
                RunConfig(input=SPHERES, outlier=bad)

    def test_alpha_and_trials_validation(self):
        with pytest.raises(ConfigError):
            RunConfig(input=SPHERES, alpha="cubic")
        with pytest.raises(ConfigError):
            RunConfig(input=SPHERES, trials=0)

    def test_d_coercion(self):
        assert RunConfig(input=SPHERES, d="3").d == 3
        assert RunConfig(input=SPHERES, d="auto").d == "auto"
        with pytest.raises(ConfigError):
            RunConfig(input=SPHERES, d="two")

    def test_from_mapping_coercions(self):
        config = RunConfig.from_mapping(
            {
                "input": SPHERES,
                "k": "12",
                "k_sigma": "none",
                "k_tangent": "9",
                "sigma_c": "0.4",
                "input_has_labels": "true",
                "d": "auto",
            }
        )
        assert config.k == 12
        assert config.k_sigma is None
        assert config.k_tangent == 9
        assert config.sigma_c == pytest.approx(0.4)
        assert config.input_has_labels is True
        assert config.d == "auto"

    def test_from_mapping_unknown_key(self):
        with pytest.raises(ConfigError):
            RunConfig.from_mapping({"input": SPHERES, "bandwidth": "2"})

    def test_from_mapping_bad_value(self):
        with pytest.raises(ConfigError):
            RunConfig.from_mapping({"input": SPHERES, "k": "many"})

    def test_round_trip(self):
        config = RunConfig(input=SPHERES, k=9, k_sigma=4, sigma_c=0.3, outlier="ratio:0.1")
        again = RunConfig.from_mapping(config.as_dict())
        assert again == config

    def test_from_kv_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\n\ninput=nested_spheres\nk = 11\nsigma_c=0.5\n")
        config = RunConfig.from_kv_file(path)
        assert config.input == "nested_spheres"
        assert config.k == 11
        assert config.sigma_c == pytest.approx(0.5)

    def test_from_kv_file_bad_line(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("input=nested_spheres\njust words\n")
        with pytest.raises(ConfigError):
            RunConfig.from_kv_file(path)


class TestGeneratorSpec:
    def test_plain_name(self):
        assert parse_generator_spec("nested_spheres") == ("nested_spheres", {})

    def test_params(self):
        name, params = parse_generator_spec("intersecting_planes:n_per=40,noise_sigma=0.1")
        assert name == "intersecting_planes"
        assert params == {"n_per": 40, "noise_sigma": 0.1}
        assert isinstance(params["n_per"], int)

    def test_tuple_syntax(self):
        _, params = parse_generator_spec("swissroll_plane_outliers:plane_x=0.5|15.5")
        assert params["plane_x"] == (0.5, 15.5)

    def test_bad_item(self):
        with pytest.raises(ConfigError):
            parse_generator_spec("nested_spheres:radius")


class TestResolveInput:
    def test_generator_fresh_per_seed(self):
        config = RunConfig(input=SPHERES)
        a = resolve_input(config, trial_seed=2)
        b = resolve_input(config, trial_seed=2)
        c = resolve_input(config, trial_seed=3)
        assert a.cloud.data.tobytes() == b.cloud.data.tobytes()
        assert a.cloud.data.tobytes() != c.cloud.data.tobytes()

    def test_pinned_seed_wins(self):
        config = RunConfig(input="nested_spheres:n_per=20,seed=7")
        a = resolve_input(config, trial_seed=0)
        b = resolve_input(config, trial_seed=5)
        assert a.cloud.data.tobytes() == b.cloud.data.tobytes()
        assert a.seed == 7

    def test_empty_input(self):
        with pytest.raises(ConfigError):
            resolve_input(RunConfig(), trial_seed=0)

    def test_csv_round_trip(self, tmp_path):
        ds = gen_nested_spheres(n_per=15, seed=0)
        path = tmp_path / "cloud.csv"
        save_cloud_csv(ds, path)
        config = RunConfig(input=str(path), input_has_header=True, input_has_labels=True)
        loaded = resolve_input(config, trial_seed=99)
        assert loaded.seed == -1
        assert loaded.cloud.data.tobytes() == ds.cloud.data.tobytes()  # repr round trip is exact
        np.testing.assert_array_equal(loaded.labels, ds.labels)

    def test_csv_without_labels(self, tmp_path):
        path = tmp_path / "plain.csv"
        path.write_text("0.0,1.0\n2.0,3.0\n")
        loaded = load_cloud_csv(path)
        assert loaded.cloud.n == 2
        np.testing.assert_array_equal(loaded.labels, [0, 0])
        assert not loaded.outlier_flags.any()

    def test_bad_csv(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\nc,d\n")
        with pytest.raises(ConfigError):
            load_cloud_csv(path)


class TestRunTrials:
    def test_datasets_match_make_dataset(self):
        config = RunConfig(input=SPHERES, k=8, n_c=2, seed=10, trials=3)
        _, metrics, datasets = run_trials(config)
        assert len(metrics) == len(datasets) == 3
        for t, ds in enumerate(datasets):
            fresh = make_dataset("nested_spheres", seed=10 + t, n_per=60, noise_sigma=0.05)
            assert ds.cloud.data.tobytes() == fresh.cloud.data.tobytes()

    def test_metrics_fields(self):
        config = RunConfig(input=SPHERES, k=8, n_c=2, seed=0, trials=2)
        _, metrics, _ = run_trials(config)
        for m in metrics:
            assert set(m) == {"rand"}  # no outliers in truth, mode off
            assert 0.0 <= m["rand"] <= 1.0

    def test_f_measure_present_with_outliers(self):
        config = RunConfig(
            input="swissroll_plane_outliers:n_roll=150,n_plane=80,n_outliers=20,noise_sigma=0.1,height=4.0",
            k=10, n_c=2, seed=0, trials=1, outlier="ratio:0.08",
        )
        _, metrics, _ = run_trials(config)
        assert set(metrics[0]) == {"rand", "f_measure"}


class TestRunCluster:
    def test_artifacts_and_reproducibility(self, tmp_path):
        config = RunConfig(input=SPHERES, k=8, n_c=2, seed=1, trials=2)
        payload = run_cluster(config, tmp_path / "a")
        run_cluster(config, tmp_path / "b")

        expected = {
            "config.json",
            "metrics.json",
            "trial_000/labels.csv",
            "trial_000/scores.csv",
            "trial_001/labels.csv",
            "trial_001/scores.csv",
        }
        tree_a = tree_bytes(tmp_path / "a")
        assert set(tree_a) == expected
        assert tree_a == tree_bytes(tmp_path / "b")

        stored = json.loads((tmp_path / "a" / "metrics.json").read_text())
        assert stored == payload
        assert stored["config"] == config.as_dict()
        assert stored["metrics"]["trials"] == 2
        assert len(stored["metrics"]["rand"]["values"]) == 2

        labels = (tmp_path / "a" / "trial_000" / "labels.csv").read_text().splitlines()
        assert labels[0] == "point_index,label"
        assert len(labels) == 121

    def test_timings_opt_in(self, tmp_path):
        config = RunConfig(input=SPHERES, k=8, n_c=2, trials=1)
        run_cluster(config, tmp_path / "plain")
        assert not (tmp_path / "plain" / "timings.json").exists()
        run_cluster(config, tmp_path / "timed", write_timings=True)
        timed = json.loads((tmp_path / "timed" / "timings.json").read_text())
        assert "total" in timed["seconds"]
        assert all(v >= 0 for v in timed["seconds"].values())


class TestRunSweep:
    def test_end_to_end(self, tmp_path):
        base = RunConfig(input=SPHERES, k=8, n_c=2, seed=0)
        grid = {"k": [8, 10], "sigma_c": [0.5, 1.0]}
        report = run_sweep(base, grid, tmp_path, selection_trials=2, eval_trials=3)

        assert report["grid_keys"] == ["k", "sigma_c"]
        assert len(report["selection"]) == 4
        assert set(report["best_params"]) == {"k", "sigma_c"}
        assert report["evaluation"]["trials"] == 3
        assert report["chosen_config"]["trials"] == 3
        assert report["chosen_config"]["seed"] == 2  # base.seed + selection_trials

        stored = json.loads((tmp_path / "report.json").read_text())
        assert stored == report

        # the eval directory is a plain run_cluster of the chosen config
        chosen = RunConfig.from_mapping(report["chosen_config"])
        rerun = run_cluster(chosen, tmp_path / "rerun")
        assert rerun["metrics"] == report["evaluation"]
        eval_tree = tree_bytes(tmp_path / "eval")
        rerun_tree = tree_bytes(tmp_path / "rerun")
        assert eval_tree == rerun_tree

    def test_bad_grid_key(self, tmp_path):
        base = RunConfig(input=SPHERES)
        with pytest.raises(ConfigError):
            run_sweep(base, {"trials": [1, 2]}, tmp_path)
        with pytest.raises(ConfigError):
            run_sweep(base, {}, tmp_path)

    def test_needs_ground_truth(self, tmp_path):
        ds = gen_nested_spheres(n_per=10, seed=0)
        path = tmp_path / "cloud.csv"
        save_cloud_csv(ds, path)
        base = RunConfig(input=str(path), input_has_header=True)
        with pytest.raises(ConfigError):
            run_sweep(base, {"k": [5]}, tmp_path / "out")

    def test_failing_point_recorded(self, tmp_path):
        base = RunConfig(input=SPHERES, n_c=2, seed=0)
        # k=200 exceeds the 120-point dataset and must fail that point only
        report = run_sweep(base, {"k": [8, 200]}, tmp_path, selection_trials=1, eval_trials=1)
        by_k = {row["params"]["k"]: row for row in report["selection"]}
        assert "error" in by_k[200] and "InvalidK" in by_k[200]["error"]
        assert "rand_mean" in by_k[8]
        assert report["best_params"]["k"] == 8

    def test_all_points_failing(self, tmp_path):
        base = RunConfig(input=SPHERES, n_c=2, seed=0)
        with pytest.raises(ConfigError):
            run_sweep(base, {"k": [200, 300]}, tmp_path, selection_trials=1, eval_trials=1)


class TestExport:
    def test_files_and_alignment(self, tmp_path):
        rng = np.random.default_rng(0)
        points = rng.normal(size=(5, 3))
        labels = np.array([0, 1, 1, -1, 0])
        scores = rng.uniform(size=5)
        export_arrays(points, labels, scores, tmp_path)

        rows = (tmp_path / "points_labels.csv").read_text().splitlines()
        assert rows[0] == "point_index,x0,x1,x2,label"
        assert len(rows) == 6
        assert rows[4].endswith(",-1")

        srows = (tmp_path / "points_scores.csv").read_text().splitlines()
        assert srows[0] == "point_index,x0,x1,x2,pi_score"
        got = np.array([float(line.split(",")[-1]) for line in srows[1:]])
        np.testing.assert_array_equal(got, scores)

    def test_scores_optional(self, tmp_path):
        points = np.zeros((3, 2))
        export_arrays(points, np.zeros(3, dtype=int), None, tmp_path)
        assert (tmp_path / "points_labels.csv").exists()
        assert not (tmp_path / "points_scores.csv").exists()

    def test_length_mismatch(self, tmp_path):
        points = np.zeros((3, 2))
        with pytest.raises(LengthMismatch):
            export_arrays(points, np.zeros(2, dtype=int), None, tmp_path)
        with pytest.raises(LengthMismatch):
            export_arrays(points, np.zeros(3, dtype=int), np.zeros(4), tmp_path)

    def test_export_plot_data(self, tmp_path):
        from tangentcut.spectral import ClusterConfig, cluster

        ds = gen_nested_spheres(n_per=40, noise_sigma=0.05, seed=0)
        result = cluster(ds.cloud, ClusterConfig(k=8, n_c=2, seed=0))
        export_plot_data(result, ds.cloud, tmp_path)
        rows = (tmp_path / "points_labels.csv").read_text().splitlines()
        assert len(rows) == 81
        export_plot_data(result, ds.cloud, tmp_path / "noscores", include_scores=False)
        assert not (tmp_path / "noscores" / "points_scores.csv").exists()
