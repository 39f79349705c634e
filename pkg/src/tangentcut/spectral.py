"""Spectral relaxation of the normalized cut on the compound similarity.

The generalized problem L e = lambda D e is reduced symmetrically via
D^-1/2 L D^-1/2 and solved sparse (shift-invert Lanczos) with a dense
fallback; k-means on the raw generalized eigenvector rows yields labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from time import perf_counter

import numpy as np
from scipy import sparse
from scipy.linalg import eigh as dense_eigh
from scipy.sparse.linalg import ArpackError, eigsh

from ._kmeans import kmeans
from .affinity import SimilarityMatrix, as_csr, similarity_matrix
from .errors import ConfigError, ConvergenceFailure, InsufficientInliers, IsolatedVertex
from .geometry import NeighborhoodGraph, PointCloud, build_knn_graph
from .outlier import OutlierReport, detect_outliers
from .tangent import TangentFrame, WeightConfig, estimate_tangent

Array = np.ndarray

_DENSE_CUTOFF = 256
_RESIDUAL_TOL = 1e-6


@dataclass
class SpectralEmbedding:
    """First generalized eigenvectors, one row per point, columns ascending."""

    vectors: Array       # (n, n_c)
    eigenvalues: Array   # (n_c,)


@dataclass
class ClusterConfig:
    """Everything one clustering pass needs."""

    k: int = 15
    k_sigma: int | None = None            # None -> min(7, k)
    k_tangent: int | None = None          # None -> frames use the clustering graph
    dim: int | str = 2
    weights: WeightConfig = field(default_factory=WeightConfig)
    sigma_c: float = 1.0
    n_c: int = 2
    outlier_mode: str = "off"             # off | ratio | auto
    outlier_ratio: float | None = None
    kmeans_replicates: int = 100
    seed: int = 0

    def resolved_k_sigma(self) -> int:
        return min(7, self.k) if self.k_sigma is None else self.k_sigma


@dataclass
class ClusterResult:
    """Labels (with -1 marking filtered outliers), masks, scores, embedding."""

    labels: Array          # (n,) int64
    inlier_mask: Array     # (n,) bool
    scores: Array          # (n,) stationary scores on the pre-filter graph
    embedding: SpectralEmbedding   # rows align with the inlier subset
    kmeans_inertia: float


def laplacian(w: "SimilarityMatrix | Array | sparse.sparray") -> tuple[sparse.csr_array, Array]:
    """Unnormalized Laplacian L = D - W plus the degree vector.

    Raises IsolatedVertex when a degree is zero.
    """
    mat = as_csr(w)
    deg = np.asarray(mat.sum(axis=1)).ravel()
    if (deg == 0.0).any():
        raise IsolatedVertex(f"vertex {int(np.flatnonzero(deg == 0.0)[0])} has zero degree")
    lap = (sparse.diags_array(deg, format="csr") - mat).tocsr()
    return lap, deg


def _fix_signs(vectors: Array) -> Array:
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[idx, np.arange(vectors.shape[1])] < 0, -1.0, 1.0)
    return vectors * signs


def _residuals_ok(lap: sparse.csr_array, deg: Array, vecs: Array, vals: Array) -> bool:
    for h in range(vecs.shape[1]):
        e = vecs[:, h]
        lhs = lap @ e - vals[h] * (deg * e)
        if np.linalg.norm(lhs) > _RESIDUAL_TOL * np.linalg.norm(deg * e):
            return False
    return True


def generalized_eigvecs(
    lap: "sparse.sparray | Array",
    degrees: Array,
    n_c: int,
) -> SpectralEmbedding:
    """Smallest ``n_c`` eigenpairs of L e = lambda D e, D = diag(degrees).

    Eigenvalues ascend; each vector's largest-magnitude entry is positive.
    Verified against the residual bound |L e - lambda D e| <= 1e-6 |D e|;
    raises ConvergenceFailure if even the dense path misses it.
    """
    lap = sparse.csr_array(lap) if not sparse.issparse(lap) else lap.tocsr()
    deg = np.asarray(degrees, dtype=np.float64).ravel()
    n = lap.shape[0]
    if not 2 <= n_c <= n:
        raise ConfigError(f"n_c={n_c} out of range for n={n}")
    if (deg <= 0).any():
        raise IsolatedVertex("degrees must be strictly positive")

    inv_sqrt = 1.0 / np.sqrt(deg)
    scaling = sparse.diags_array(inv_sqrt, format="csr")
    lap_sym = scaling @ lap @ scaling
    lap_sym = ((lap_sym + lap_sym.T) / 2.0).tocsr()

    vals = vecs = None
    if n > _DENSE_CUTOFF and n_c < n - 1:
        try:
            # shift-invert just below zero: L_sym + eps*I is SPD, so the
            # factorization is stable and the smallest eigenvalues come back.
            # A fragmented graph makes lambda = 0 degenerate; the wide Krylov
            # space and bounded restarts keep that case from stalling, and the
            # residual check below decides whether the answer is usable.
            v0 = np.random.Generator(np.random.PCG64(0x7A6E)).standard_normal(n)
            ncv = min(n - 1, max(40, 4 * n_c + 1))
            vals, vecs = eigsh(
                lap_sym, k=n_c, sigma=-1e-3, which="LM", v0=v0,
                tol=1e-10, ncv=ncv, maxiter=500,
            )
        except (ArpackError, RuntimeError):
            vals = vecs = None
    if vals is None:
        dense = lap_sym.toarray()
        vals, vecs = dense_eigh(dense, subset_by_index=(0, n_c - 1))

    order = np.argsort(vals)
    vals = np.asarray(vals)[order]
    vecs = np.asarray(vecs)[:, order]
    gen_vecs = _fix_signs(inv_sqrt[:, None] * vecs)

    if not _residuals_ok(lap, deg, gen_vecs, vals):
        dense = lap_sym.toarray()
        vals, vecs = dense_eigh(dense, subset_by_index=(0, n_c - 1))
        gen_vecs = _fix_signs(inv_sqrt[:, None] * vecs)
        if not _residuals_ok(lap, deg, gen_vecs, vals):
            raise ConvergenceFailure("generalized eigenpairs missed the residual bound")
    return SpectralEmbedding(gen_vecs, np.asarray(vals, dtype=np.float64))


def kmeans_rows(
    embedding: "SpectralEmbedding | Array",
    n_c: int,
    replicates: int = 100,
    seed: int = 0,
) -> Array:
    """Labels from best-of-``replicates`` seeded k-means on embedding rows."""
    x = embedding.vectors if isinstance(embedding, SpectralEmbedding) else np.asarray(embedding, dtype=np.float64)
    labels, _, _ = kmeans(x, n_c, replicates=replicates, seed=seed)
    return labels


class _StageClock:
    """Accumulates wall-clock seconds per pipeline stage into a dict."""

    def __init__(self, sink: dict | None):
        self.sink = sink

    def add(self, stage: str, seconds: float) -> None:
        if self.sink is not None:
            self.sink[stage] = self.sink.get(stage, 0.0) + seconds


def _graph_frames_w(
    cloud: PointCloud, config: ClusterConfig, clock: _StageClock
) -> tuple[NeighborhoodGraph, list[TangentFrame], SimilarityMatrix]:
    t0 = perf_counter()
    graph = build_knn_graph(cloud, config.k, config.resolved_k_sigma())
    t1 = perf_counter()
    if config.k_tangent is None or config.k_tangent == config.k:
        tangent_graph = graph
    else:
        tangent_graph = build_knn_graph(cloud, config.k_tangent, min(7, config.k_tangent))
    frames = estimate_tangent(cloud, tangent_graph, config.weights, config.dim)
    t2 = perf_counter()
    w = similarity_matrix(cloud, graph, frames, config.sigma_c)
    t3 = perf_counter()
    clock.add("graph", t1 - t0)
    clock.add("tangent", t2 - t1)
    clock.add("affinity", t3 - t2)
    return graph, frames, w


def cluster(cloud: PointCloud, config: ClusterConfig, timings: dict | None = None) -> ClusterResult:
    """Full pass: graph, tangent frames, similarity, optional outlier
    filtering with a rebuild on the survivors, spectral embedding, k-means.

    Outliers keep the sentinel label -1; ``scores`` always reports the
    stationary distribution of the pre-filter graph.  Pass a dict as
    ``timings`` to collect per-stage wall-clock seconds.
    """
    clock = _StageClock(timings)
    _, _, w = _graph_frames_w(cloud, config, clock)
    t0 = perf_counter()
    report: OutlierReport = detect_outliers(
        w, mode=config.outlier_mode, ratio=config.outlier_ratio, seed=config.seed
    )
    clock.add("outlier", perf_counter() - t0)

    mask = report.inlier_mask
    active_cloud = cloud
    active_w = w
    if config.outlier_mode != "off":
        d_eff = config.dim if isinstance(config.dim, int) else cloud.dim_ambient
        needed = config.n_c * (d_eff + 1)
        n_in = int(mask.sum())
        if n_in < needed:
            raise InsufficientInliers(f"{n_in} inliers left, need at least {needed}")
        active_cloud = cloud.subset(mask)
        _, _, active_w = _graph_frames_w(active_cloud, config, clock)

    t0 = perf_counter()
    lap, deg = laplacian(active_w)
    embedding = generalized_eigvecs(lap, deg, config.n_c)
    t1 = perf_counter()
    sub_labels, _, inertia = kmeans(
        embedding.vectors, config.n_c, replicates=config.kmeans_replicates, seed=config.seed
    )
    t2 = perf_counter()
    clock.add("spectral", t1 - t0)
    clock.add("kmeans", t2 - t1)

    labels = np.full(cloud.n, -1, dtype=np.int64)
    labels[mask] = sub_labels
    return ClusterResult(labels, mask, report.scores, embedding, float(inertia))
