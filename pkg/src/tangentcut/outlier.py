"""Random-walk outlier ranking and filtering.

For a symmetric similarity W the random walk P = D^-1 W has stationary
distribution proportional to the vertex degrees, so ranking by degree mass is
exact, cheap, and needs no iteration.  Points with the least stationary mass
are the outliers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ._kmeans import kmeans
from .affinity import SimilarityMatrix, as_csr
from .errors import ConfigError, IsolatedVertex

Array = np.ndarray

MODES = ("off", "ratio", "auto")


@dataclass
class OutlierReport:
    """Stationary scores plus the inlier mask produced by one filtering pass."""

    scores: Array        # (n,) stationary probabilities, sum 1
    inlier_mask: Array   # (n,) bool
    mode: str

    @property
    def n_outliers(self) -> int:
        return int((~self.inlier_mask).sum())


def _degrees(w: "SimilarityMatrix | Array | sparse.sparray") -> Array:
    deg = np.asarray(as_csr(w).sum(axis=1)).ravel()
    if (deg == 0.0).any():
        isolated = int(np.flatnonzero(deg == 0.0)[0])
        raise IsolatedVertex(f"vertex {isolated} has zero total similarity")
    return deg


def stationary_scores(w: "SimilarityMatrix | Array | sparse.sparray") -> Array:
    """Stationary distribution of the degree-normalized random walk on W."""
    deg = _degrees(w)
    return deg / deg.sum()


def _auto_split(values: Array, seed: int, replicates: int = 100) -> Array:
    """Inlier mask from 2-means on a 1-d value vector; smaller mean = outliers."""
    labels, centers, _ = kmeans(values[:, None], 2, replicates=replicates, seed=seed)
    centers = centers.ravel()
    out_cluster = int(np.argmin(centers))
    mask = labels != out_cluster
    # points exactly equidistant between the two centers stay inliers
    tied = np.abs(values - centers[0]) == np.abs(values - centers[1])
    mask[tied] = True
    return mask


def filter_outliers(
    scores: Array,
    mode: str = "ratio",
    ratio: float | None = None,
    seed: int = 0,
) -> Array:
    """Inlier mask for a score vector (low score = more outlying).

    ``ratio`` mode removes round(ratio * n) points with the lowest scores,
    ties resolved by marking the lower index first.  ``auto`` mode splits the
    raw score values by seeded 2-means and drops the low-mean cluster.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    n = len(scores)
    if mode not in MODES:
        raise ConfigError(f"unknown outlier mode {mode!r}; choose from {MODES}")
    if mode == "off":
        return np.ones(n, dtype=bool)
    if mode == "ratio":
        if ratio is None or not 0.0 <= ratio < 1.0:
            raise ConfigError(f"ratio mode needs 0 <= ratio < 1, got {ratio}")
        n_drop = int(np.floor(ratio * n + 0.5))
        mask = np.ones(n, dtype=bool)
        order = np.lexsort((np.arange(n), scores))
        mask[order[:n_drop]] = False
        return mask
    return _auto_split(scores, seed=seed)


def detect_outliers(
    w: "SimilarityMatrix | Array | sparse.sparray",
    mode: str = "ratio",
    ratio: float | None = None,
    seed: int = 0,
) -> OutlierReport:
    """Rank by stationary mass and filter.

    ``auto`` mode clusters the raw degree vector (not the normalized scores);
    the two orderings agree, but the split is defined on degrees.
    """
    deg = _degrees(w)
    scores = deg / deg.sum()
    if mode == "auto":
        mask = _auto_split(deg, seed=seed)
    else:
        mask = filter_outliers(scores, mode=mode, ratio=ratio, seed=seed)
    return OutlierReport(scores, mask, mode)
