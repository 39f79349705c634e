"""Point clouds, exact k-nearest-neighbor graphs, and principal angles.

The neighbor graph built here is shared by tangent estimation and by the
similarity matrix: one distance matrix pass, union-symmetrized edges, and
per-point self-tuning bandwidths.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DuplicatePoints, InvalidK, NotOrthonormal

Array = np.ndarray


@dataclass
class PointCloud:
    """Finite set of points in R^D, stored as a float64 (n, D) array."""

    data: Array

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-d array of points, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"need at least one point and one coordinate, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("point coordinates must be finite")
        self.data = arr

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim_ambient(self) -> int:
        return self.data.shape[1]

    def subset(self, mask: Array) -> "PointCloud":
        """New cloud holding the points where ``mask`` is True."""
        return PointCloud(self.data[np.asarray(mask, dtype=bool)])


@dataclass
class NeighborhoodGraph:
    """Union-symmetrized kNN graph in CSR form.

    ``indices[indptr[i]:indptr[i+1]]`` lists the neighbors of point i sorted by
    (distance, index) ascending; ``dists`` holds the matching Euclidean
    distances.  Because the edge set is the union of the directed kNN
    relations, per-point degrees can exceed ``k``.
    """

    indptr: Array        # (n+1,) int64
    indices: Array       # (nnz,) int64
    dists: Array         # (nnz,) float64
    bandwidths: Array    # (n,) float64, distance to the k_sigma-th nearest point
    k: int
    k_sigma: int = field(default=7)

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @cached_property
    def neighbors(self) -> list[Array]:
        return [self.indices[self.indptr[i]:self.indptr[i + 1]] for i in range(self.n)]

    @cached_property
    def distances(self) -> list[Array]:
        return [self.dists[self.indptr[i]:self.indptr[i + 1]] for i in range(self.n)]

    @property
    def degrees(self) -> Array:
        return np.diff(self.indptr)

    @cached_property
    def edges(self) -> tuple[Array, Array]:
        """Unique undirected edges as ((E, 2) int64 with i < j, (E,) distances)."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = rows < self.indices
        pairs = np.column_stack((rows[keep], self.indices[keep]))
        return pairs, self.dists[keep]


def _check_no_duplicates(dmat: Array) -> None:
    # diagonal is already +inf when this runs
    if (dmat == 0.0).any():
        i, j = np.argwhere(dmat == 0.0)[0]
        raise DuplicatePoints(f"points {min(i, j)} and {max(i, j)} coincide")


def build_knn_graph(cloud: PointCloud, k: int, k_sigma: int = 7) -> NeighborhoodGraph:
    """Exact kNN graph with deterministic ties and union symmetrization.

    Ties in distance are broken toward the lower point index.  Bandwidths are
    the distance to the ``k_sigma``-th nearest point, taken before
    symmetrization.  Distances are exact Euclidean (full pairwise matrix, no
    approximation), so expect O(n^2) memory; intended for n up to ~10^4.
    """
    n = cloud.n
    if not 1 <= k < n:
        raise InvalidK(f"k={k} must satisfy 1 <= k <= n-1 with n={n}")
    if not 1 <= k_sigma <= k:
        raise InvalidK(f"k_sigma={k_sigma} must satisfy 1 <= k_sigma <= k={k}")

    dmat = cdist(cloud.data, cloud.data)
    np.fill_diagonal(dmat, np.inf)
    _check_no_duplicates(dmat)

    # k-th smallest value per row; candidates <= that value catch exact ties,
    # then (distance, index) lexsort keeps the first k deterministically.
    kth_val = np.partition(dmat, k - 1, axis=1)[:, k - 1]
    adjacency = np.zeros((n, n), dtype=bool)
    bandwidths = np.empty(n, dtype=np.float64)
    for i in range(n):
        cand = np.flatnonzero(dmat[i] <= kth_val[i])
        order = np.lexsort((cand, dmat[i, cand]))
        sel = cand[order[:k]]
        adjacency[i, sel] = True
        bandwidths[i] = dmat[i, sel[k_sigma - 1]]

    adjacency |= adjacency.T

    counts = adjacency.sum(axis=1)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = np.empty(indptr[-1], dtype=np.int64)
    dists = np.empty(indptr[-1], dtype=np.float64)
    for i in range(n):
        nb = np.flatnonzero(adjacency[i])
        order = np.lexsort((nb, dmat[i, nb]))
        sl = slice(indptr[i], indptr[i + 1])
        indices[sl] = nb[order]
        dists[sl] = dmat[i, nb[order]]

    return NeighborhoodGraph(indptr, indices, dists, bandwidths, k, k_sigma)


def _check_orthonormal(basis: Array, tol: float, name: str) -> None:
    gram = basis.T @ basis
    dev = np.abs(gram - np.eye(basis.shape[1])).max()
    if dev > tol:
        raise NotOrthonormal(f"{name} deviates from orthonormality by {dev:.3e} (tol {tol:.1e})")


def principal_angles(basis_a: Array, basis_b: Array, orthonormal_tol: float = 1e-8) -> float:
    """2-norm of the principal-angle vector between two column-orthonormal bases.

    Uses cosines from svd(A^T B) combined with sines from svd(B - A(A^T B)) so
    that angles near zero are not lost to arccos round-off.  Returns a value in
    [0, (pi/2) * sqrt(min(d_a, d_b))].
    """
    A = np.asarray(basis_a, dtype=np.float64)
    B = np.asarray(basis_b, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2:
        raise ValueError("bases must be 2-d arrays of shape (D, d)")
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"ambient dimensions differ: {A.shape[0]} vs {B.shape[0]}")
    _check_orthonormal(A, orthonormal_tol, "basis_a")
    _check_orthonormal(B, orthonormal_tol, "basis_b")

    d_min = min(A.shape[1], B.shape[1])
    M = A.T @ B
    cosines = np.clip(np.linalg.svd(M, compute_uv=False), 0.0, 1.0)          # descending
    sines = np.clip(np.linalg.svd(B - A @ M, compute_uv=False), 0.0, 1.0)
    sines = np.sort(sines)[:d_min]                                            # ascending
    angles = np.arctan2(sines, cosines[:d_min])
    return float(np.linalg.norm(angles))
