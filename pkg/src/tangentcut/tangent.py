"""Curvature-weighted local tangent frames.

Each point's neighborhood offsets are weighted by the inverse of a local
error model (noise floor plus a distance-growing term), accumulated into a
scatter matrix, and the top eigenvectors give the tangent basis.  Down-
weighting far neighbors shrinks the curvature-induced bias that plain local
PCA suffers on curved manifolds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import backends
from .errors import ConfigError, DegenerateNeighborhood
from .geometry import NeighborhoodGraph, PointCloud

Array = np.ndarray

_NAMED_ALPHAS: dict[str, Callable[[Array], Array]] = {
    "constant": lambda r: np.zeros_like(r),
    "quadratic": lambda r: r * r,
    "quartic": lambda r: (r * r) * (r * r),
}


@dataclass
class WeightConfig:
    """Error model behind the neighbor weights 1 / (sigma_n^2 + sigma_e^2 * alpha(r)).

    ``alpha`` is one of the named kernels ("constant" makes every weight equal,
    recovering unweighted PCA) or any nondecreasing callable with alpha(0) >= 0.
    """

    sigma_n: float = 1.0
    sigma_e: float = 1.0
    alpha: Union[str, Callable[[Array], Array]] = "quadratic"

    def __post_init__(self) -> None:
        if not self.sigma_n > 0:
            raise ConfigError(f"sigma_n must be positive, got {self.sigma_n}")
        if not self.sigma_e > 0:
            raise ConfigError(f"sigma_e must be positive, got {self.sigma_e}")
        if isinstance(self.alpha, str) and self.alpha not in _NAMED_ALPHAS:
            raise ConfigError(f"unknown alpha kernel {self.alpha!r}; choose from {sorted(_NAMED_ALPHAS)}")

    def alpha_values(self, radii: Array) -> Array:
        """alpha evaluated on ``radii``; custom callables are checked on the fly."""
        if isinstance(self.alpha, str):
            return _NAMED_ALPHAS[self.alpha](radii)
        probe = np.sort(np.append(np.asarray(radii, dtype=np.float64).ravel(), 0.0))
        vals = np.asarray(self.alpha(probe), dtype=np.float64)
        if vals.shape != probe.shape:
            raise ConfigError("custom alpha must map an array to an equally shaped array")
        if (vals < 0).any():
            raise ConfigError("custom alpha must be nonnegative")
        if (np.diff(vals) < -1e-12).any():
            raise ConfigError("custom alpha must be nondecreasing")
        return np.asarray(self.alpha(radii), dtype=np.float64)

    def weights(self, radii: Array) -> Array:
        radii = np.asarray(radii, dtype=np.float64)
        return 1.0 / (self.sigma_n**2 + self.sigma_e**2 * self.alpha_values(radii))


@dataclass
class TangentFrame:
    """Estimated tangent space at one point.

    ``basis`` is (D, intrinsic_dim) with orthonormal columns, ``spectrum`` the
    full descending eigenvalue vector of the local structure matrix.
    """

    point_index: int
    basis: Array
    spectrum: Array
    intrinsic_dim: int


def taylor_weights(center: Array, neighborhood: Array, config: WeightConfig) -> Array:
    """Per-neighbor weights from the local error model.

    ``neighborhood`` is (m, D); radii are Euclidean distances to ``center``.
    """
    center = np.asarray(center, dtype=np.float64)
    nb = np.asarray(neighborhood, dtype=np.float64)
    radii = np.linalg.norm(nb - center[None, :], axis=1)
    return config.weights(radii)


def local_structure_matrix(center: Array, neighborhood: Array, weights: Array) -> Array:
    """Weighted scatter T = sum_j w_j^2 (x_j - c)(x_j - c)^T, exactly symmetric."""
    center = np.asarray(center, dtype=np.float64)
    nb = np.asarray(neighborhood, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if len(w) != len(nb):
        raise ValueError(f"{len(w)} weights for {len(nb)} neighbors")
    scaled = (nb - center[None, :]) * w[:, None]
    T = scaled.T @ scaled
    return (T + T.T) / 2.0


def eigengap_dimension(spectrum: Array) -> int:
    """Dimension at the largest consecutive eigengap (ties go to the smaller d).

    ``spectrum`` must be sorted descending.  A length-1 spectrum yields 1.
    """
    s = np.asarray(spectrum, dtype=np.float64)
    if s.ndim != 1 or len(s) < 1:
        raise ValueError("spectrum must be a nonempty 1-d array")
    if len(s) == 1:
        return 1
    gaps = s[:-1] - s[1:]
    return int(np.argmax(gaps)) + 1


def _fix_signs(vectors: Array) -> Array:
    """Flip eigenvector columns so the largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vectors), axis=-2)
    picked = np.take_along_axis(vectors, idx[..., None, :], axis=-2)[..., 0, :]
    return vectors * np.where(picked < 0, -1.0, 1.0)[..., None, :]


def estimate_tangent(
    cloud: PointCloud,
    graph: NeighborhoodGraph,
    config: WeightConfig | None = None,
    dim: int | str = "auto",
) -> list[TangentFrame]:
    """Tangent frame at every point of ``cloud`` from its graph neighborhood.

    ``dim`` is either a fixed intrinsic dimension or "auto" for the per-point
    eigengap estimate.  Raises DegenerateNeighborhood when a requested
    eigenvalue does not exceed 1e-12 * trace(T_i).
    """
    config = config or WeightConfig()
    ambient = cloud.dim_ambient
    if isinstance(dim, str):
        if dim != "auto":
            raise ConfigError(f"dim must be an integer or 'auto', got {dim!r}")
        fixed = None
    else:
        fixed = int(dim)
        if not 1 <= fixed <= ambient:
            raise ConfigError(f"dim={fixed} out of range for ambient dimension {ambient}")

    w = config.weights(graph.dists)
    T = backends.structure_matrices(cloud.data, graph.indptr, graph.indices, w)
    evals, evecs = np.linalg.eigh(T)                 # ascending
    evals = np.clip(evals[:, ::-1], 0.0, None)       # descending, PSD round-off clamped
    evecs = _fix_signs(evecs[:, :, ::-1])

    traces = evals.sum(axis=1)
    frames: list[TangentFrame] = []
    for i in range(cloud.n):
        d_i = fixed if fixed is not None else eigengap_dimension(evals[i])
        if evals[i, d_i - 1] <= 1e-12 * traces[i]:
            raise DegenerateNeighborhood(
                f"point {i}: rank of the local structure matrix is below {d_i} "
                f"(eigenvalue {evals[i, d_i - 1]:.3e} vs trace {traces[i]:.3e})"
            )
        frames.append(TangentFrame(i, np.ascontiguousarray(evecs[i, :, :d_i]), evals[i].copy(), d_i))
    return frames


def stack_frames(frames: list[TangentFrame], ambient: int) -> tuple[Array, Array]:
    """Pack frames into a zero-padded (n, D, d_max) array plus a dims vector."""
    dims = np.array([f.intrinsic_dim for f in frames], dtype=np.int64)
    d_max = int(dims.max())
    bases = np.zeros((len(frames), ambient, d_max), dtype=np.float64)
    for i, f in enumerate(frames):
        bases[i, :, : f.intrinsic_dim] = f.basis
    return bases, dims
