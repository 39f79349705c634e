"""Seeded k-means core shared by the spectral stage and the outlier filter.

Deterministic contract: k-means++ starts drawn from per-replicate child seeds
of one SeedSequence, Lloyd stops at relative inertia change < 1e-8 or 300
iterations, empty clusters are repaired by reassigning the point farthest
from its current center, and the winner is the replicate with minimal
inertia (ties to the lower replicate index).
"""

from __future__ import annotations

import numpy as np

Array = np.ndarray

MAX_ITER = 300
REL_TOL = 1e-8


def _plus_plus_init(x: Array, n_clusters: int, rng: np.random.Generator) -> Array:
    n = len(x)
    centers = np.empty((n_clusters, x.shape[1]), dtype=np.float64)
    centers[0] = x[int(rng.integers(n))]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for c in range(1, n_clusters):
        total = d2.sum()
        if total <= 0.0:
            centers[c:] = x[rng.integers(n, size=n_clusters - c)]
            break
        centers[c] = x[int(rng.choice(n, p=d2 / total))]
        d2 = np.minimum(d2, ((x - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(x: Array, centers: Array) -> tuple[Array, Array, float]:
    n_clusters = len(centers)
    idx = np.arange(len(x))
    prev = np.inf
    labels = np.zeros(len(x), dtype=np.int64)
    for _ in range(MAX_ITER):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        for c in range(n_clusters):
            if not (labels == c).any():
                worst = int(np.argmax(d2[idx, labels]))
                labels[worst] = c
                d2[worst, :] = 0.0  # keep one repair from stealing the same point
        for c in range(n_clusters):
            centers[c] = x[labels == c].mean(axis=0)
        inertia = float(((x - centers[labels]) ** 2).sum())
        if abs(prev - inertia) < REL_TOL * max(prev, np.finfo(float).tiny):
            prev = inertia
            break
        prev = inertia
    return labels, centers, prev


def kmeans(
    x: Array,
    n_clusters: int,
    replicates: int = 100,
    seed: int = 0,
) -> tuple[Array, Array, float]:
    """Best-of-``replicates`` k-means on the rows of ``x``.

    Returns (labels, centers, inertia) of the winning replicate.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("x must be 2-d (rows are samples)")
    if not 1 <= n_clusters <= len(x):
        raise ValueError(f"n_clusters={n_clusters} out of range for {len(x)} rows")

    children = np.random.SeedSequence(seed).spawn(replicates)
    best: tuple[float, int, Array, Array] | None = None
    for r in range(replicates):
        rng = np.random.Generator(np.random.PCG64(children[r]))
        centers = _plus_plus_init(x, n_clusters, rng)
        labels, centers, inertia = _lloyd(x, centers)
        if best is None or inertia < best[0]:
            best = (inertia, r, labels, centers)
    assert best is not None
    return best[2], best[3], best[0]
