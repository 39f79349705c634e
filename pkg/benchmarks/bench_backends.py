"""Benchmark the compiled kernels against the numpy reference backend.

Times the two hot kernels (weighted structure matrices, per-edge principal
angle norms) on a realistic workload, checks agreement, then times the full
pipeline end to end in subprocesses (backend choice binds at import, so the
end-to-end comparison needs fresh interpreters).

Usage: python3 benchmarks/bench_backends.py [--n-per 2000] [--k 30] [--repeats 5]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from tangentcut.backends import reference
from tangentcut.geometry import build_knn_graph
from tangentcut.synthetic import make_dataset
from tangentcut.tangent import WeightConfig, estimate_tangent, stack_frames

try:
    from tangentcut.backends import _fast as compiled
except ImportError:
    compiled = None

_END_TO_END = """
import time
from tangentcut.backends import backend_name
from tangentcut.spectral import ClusterConfig, cluster
from tangentcut.synthetic import make_dataset

ds = make_dataset("nested_spheres", seed=0, n_per={n_per})
t0 = time.perf_counter()
cluster(ds.cloud, ClusterConfig(k={k}, sigma_c=1.0, n_c=2, seed=0))
print(f"{{backend_name()}} {{time.perf_counter() - t0:.3f}}")
"""


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-per", type=int, default=2000, help="points per sphere (default 2000)")
    ap.add_argument("--k", type=int, default=30)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    if compiled is None:
        print("compiled backend not importable; only the reference numbers below are meaningful")

    ds = make_dataset("nested_spheres", seed=0, n_per=args.n_per)
    cloud = ds.cloud
    graph = build_knn_graph(cloud, args.k, min(7, args.k))
    wc = WeightConfig()
    weights = wc.weights(graph.dists)
    frames = estimate_tangent(cloud, graph, wc, dim=2)
    bases, dims = stack_frames(frames, cloud.dim_ambient)
    edges, _ = graph.edges

    print(f"n={cloud.n}  k={args.k}  edges={len(edges)}  repeats={args.repeats} (best-of)")
    print()
    print(f"{'kernel':<24}{'reference':>12}{'compiled':>12}{'speedup':>10}{'max |diff|':>14}")

    for name, ref_fn, fast_fn in (
        (
            "structure_matrices",
            lambda: reference.structure_matrices(cloud.data, graph.indptr, graph.indices, weights),
            lambda: compiled.structure_matrices(cloud.data, graph.indptr, graph.indices, weights),
        ),
        (
            "edge_angle_norms",
            lambda: reference.edge_angle_norms(bases, dims, edges),
            lambda: compiled.edge_angle_norms(bases, dims, edges),
        ),
    ):
        t_ref = best_of(ref_fn, args.repeats)
        if compiled is None:
            print(f"{name:<24}{t_ref:>11.4f}s{'-':>12}{'-':>10}{'-':>14}")
            continue
        t_fast = best_of(fast_fn, args.repeats)
        diff = float(np.max(np.abs(ref_fn() - fast_fn())))
        print(f"{name:<24}{t_ref:>11.4f}s{t_fast:>11.4f}s{t_ref / t_fast:>9.1f}x{diff:>14.2e}")

    print()
    print("end-to-end cluster() (fresh interpreter per backend):")
    snippet = _END_TO_END.format(n_per=args.n_per, k=args.k)
    for env_val in ("0", "1"):
        env = dict(os.environ, TANGENTCUT_PURE_PYTHON=env_val)
        out = subprocess.run(
            [sys.executable, "-c", snippet], env=env, capture_output=True, text=True, check=True
        )
        print(" ", out.stdout.strip(), "s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
