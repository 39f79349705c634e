"""Compound similarity: self-tuning distance kernel times a curvature kernel.

Edges live only on the neighbor graph.  The distance factor uses per-point
bandwidths; the curvature factor compares tangent frames across each edge and
decays fast when nearby points disagree on their tangent space, which is what
separates manifolds through an intersection.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from . import backends
from .errors import EmptyClusterDenominator
from .geometry import NeighborhoodGraph, PointCloud
from .tangent import TangentFrame, stack_frames

Array = np.ndarray


@dataclass
class SimilarityMatrix:
    """Sparse symmetric similarity with entries in [0, 1] and zero diagonal."""

    values: sparse.csr_array
    sigma_c: float

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @cached_property
    def degrees(self) -> Array:
        return np.asarray(self.values.sum(axis=1)).ravel()

    def toarray(self) -> Array:
        return self.values.toarray()

    @classmethod
    def from_dense(cls, arr: Array, sigma_c: float = 1.0) -> "SimilarityMatrix":
        return cls(sparse.csr_array(np.asarray(arr, dtype=np.float64)), sigma_c)


def distance_kernel(dist: Array, sigma_i: Array, sigma_j: Array) -> Array:
    """Self-tuning Gaussian kernel exp(-d^2 / (sigma_i * sigma_j))."""
    dist = np.asarray(dist, dtype=np.float64)
    return np.exp(-(dist * dist) / (np.asarray(sigma_i) * np.asarray(sigma_j)))


def curvature_kernel(theta: Array, dist: Array, sigma_i: Array, sigma_j: Array, sigma_c: float) -> Array:
    """Misalignment kernel exp(-theta^2 * sigma_i * sigma_j / (d^2 * sigma_c^2)).

    For a fixed angle it penalizes *close* disagreeing pairs hardest; as
    sigma_c grows it approaches 1 everywhere.
    """
    theta = np.asarray(theta, dtype=np.float64)
    dist = np.asarray(dist, dtype=np.float64)
    scale = np.asarray(sigma_i) * np.asarray(sigma_j) / (dist * dist * sigma_c * sigma_c)
    return np.exp(-(theta * theta) * scale)


def _edge_angles(graph: NeighborhoodGraph, frames: list[TangentFrame], ambient: int, edges: Array) -> Array:
    bases, dims = stack_frames(frames, ambient)
    return backends.edge_angle_norms(bases, dims, np.ascontiguousarray(edges, dtype=np.int64))


def _validate_frames(cloud: PointCloud, frames: list[TangentFrame]) -> None:
    if len(frames) != cloud.n:
        raise ValueError(f"{len(frames)} frames for {cloud.n} points")
    for i, f in enumerate(frames):
        if f.point_index != i:
            raise ValueError(f"frame {i} carries point_index {f.point_index}")


def similarity_matrix(
    cloud: PointCloud,
    graph: NeighborhoodGraph,
    frames: list[TangentFrame],
    sigma_c: float = 1.0,
) -> SimilarityMatrix:
    """Compound similarity on the graph's edge support.

    Each unordered edge is computed once and mirrored, so the matrix is
    symmetric exactly.  sigma_c -> large recovers the pure self-tuning kernel.
    """
    if not sigma_c > 0:
        raise ValueError(f"sigma_c must be positive, got {sigma_c}")
    _validate_frames(cloud, frames)

    edges, edge_d = graph.edges
    theta = _edge_angles(graph, frames, cloud.dim_ambient, edges)
    sig_i = graph.bandwidths[edges[:, 0]]
    sig_j = graph.bandwidths[edges[:, 1]]
    vals = distance_kernel(edge_d, sig_i, sig_j) * curvature_kernel(theta, edge_d, sig_i, sig_j, sigma_c)

    n = cloud.n
    upper = sparse.coo_array((vals, (edges[:, 0], edges[:, 1])), shape=(n, n))
    w = (upper + upper.T).tocsr()
    return SimilarityMatrix(w, sigma_c)


def curved_level(point_index: int, cloud: PointCloud, graph: NeighborhoodGraph, frames: list[TangentFrame]) -> float:
    """Local curvature diagnostic: sum over neighbors of theta_ij / dist_ij."""
    _validate_frames(cloud, frames)
    i = int(point_index)
    nb = graph.neighbors[i]
    dists = graph.distances[i]
    edges = np.column_stack((np.full(len(nb), i, dtype=np.int64), nb))
    theta = _edge_angles(graph, frames, cloud.dim_ambient, edges)
    return float((theta / dists).sum())


def curved_measure_between(
    set_a: Array,
    set_b: Array,
    cloud: PointCloud,
    graph: NeighborhoodGraph,
    frames: list[TangentFrame],
) -> float:
    """Curvature mass on graph edges between two index sets (or within one).

    The sets must be identical or disjoint.  Identical sets sum over each
    unordered intra edge once; disjoint sets sum over crossing edges.
    """
    _validate_frames(cloud, frames)
    a = np.unique(np.asarray(set_a, dtype=np.int64))
    b = np.unique(np.asarray(set_b, dtype=np.int64))
    same = len(a) == len(b) and (a == b).all()
    if not same and np.intersect1d(a, b).size:
        raise ValueError("index sets must be identical or disjoint")

    in_a = np.zeros(cloud.n, dtype=bool)
    in_a[a] = True
    in_b = np.zeros(cloud.n, dtype=bool)
    in_b[b] = True

    edges, edge_d = graph.edges
    ia, ja = in_a[edges[:, 0]], in_a[edges[:, 1]]
    ib, jb = in_b[edges[:, 0]], in_b[edges[:, 1]]
    keep = (ia & jb) | (ib & ja) if not same else (ia & ja)
    if not keep.any():
        return 0.0
    theta = _edge_angles(graph, frames, cloud.dim_ambient, edges[keep])
    return float((theta / edge_d[keep]).sum())


def as_csr(w: "SimilarityMatrix | Array | sparse.sparray") -> sparse.csr_array:
    """Coerce a similarity argument (wrapper, dense array, or sparse) to CSR."""
    if isinstance(w, SimilarityMatrix):
        return w.values
    if isinstance(w, np.ndarray):
        return sparse.csr_array(np.asarray(w, dtype=np.float64))
    return sparse.csr_array(w)


def objective_score(labels: Array, w: "SimilarityMatrix | Array | sparse.sparray") -> float:
    """Sum over clusters of (similarity mass leaving) / (intra mass, pairs once).

    Invariant under cluster relabeling.  Raises EmptyClusterDenominator when a
    cluster has no intra-cluster mass.
    """
    mat = as_csr(w)
    labels = np.asarray(labels)
    if labels.shape[0] != mat.shape[0]:
        raise ValueError(f"{labels.shape[0]} labels for a {mat.shape[0]}-vertex graph")

    score = 0.0
    for lab in np.unique(labels):
        idx = np.flatnonzero(labels == lab)
        rows = mat[idx]
        total = rows.sum()
        intra_double = rows[:, idx].sum()
        intra = intra_double / 2.0
        if intra == 0.0:
            raise EmptyClusterDenominator(f"cluster {lab!r} has zero intra-cluster similarity")
        score += (total - intra_double) / intra
    return float(score)
