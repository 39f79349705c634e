"""Vectorized numpy implementations of the two hot kernels.

Used when the compiled extension is unavailable (or disabled via the
TANGENTCUT_PURE_PYTHON environment variable).  Must stay numerically
interchangeable with ``_fast`` to ~1e-12.
"""

from __future__ import annotations

import numpy as np

Array = np.ndarray


def structure_matrices(data: Array, indptr: Array, indices: Array, weights: Array) -> Array:
    """Per-point weighted scatter of neighbor offsets.

    T_i = sum_j w_ij^2 (x_j - x_i)(x_j - x_i)^T over the CSR neighborhood of i.
    ``weights`` aligns with ``indices``.  Returns (n, D, D) float64.
    """
    n, dim = data.shape
    counts = np.diff(indptr)
    m = int(counts.max()) if n else 0
    slot = np.arange(m)[None, :] < counts[:, None]          # (n, m) valid-slot mask
    pad_idx = np.zeros((n, m), dtype=np.int64)
    pad_idx[slot] = indices
    w2 = np.zeros((n, m), dtype=np.float64)
    w2[slot] = np.asarray(weights, dtype=np.float64) ** 2
    diffs = data[pad_idx] - data[:, None, :]                # (n, m, D); padded rows zeroed by w2
    out = np.einsum("nmd,nme,nm->nde", diffs, diffs, w2, optimize=True)
    # guard against einsum asymmetry at the last bit
    return (out + out.transpose(0, 2, 1)) / 2.0


def edge_angle_norms(bases: Array, dims: Array, edges: Array) -> Array:
    """2-norm of the principal-angle vector for each edge (i, j).

    ``bases`` is (n, D, d_max) with zero padding past each point's dimension
    ``dims[i]``.  Angles come from arccos of the singular values of
    J_i^T J_j, clamped into [0, 1]; min(d_i, d_j) angles enter the norm.
    """
    edges = np.asarray(edges, dtype=np.int64)
    out = np.empty(len(edges), dtype=np.float64)
    if len(edges) == 0:
        return out
    di = dims[edges[:, 0]]
    dj = dims[edges[:, 1]]
    for a, b in {(int(x), int(y)) for x, y in zip(di, dj)}:
        sel = np.flatnonzero((di == a) & (dj == b))
        left = bases[edges[sel, 0], :, :a]                  # (e, D, a)
        right = bases[edges[sel, 1], :, :b]                 # (e, D, b)
        prod = np.einsum("eda,edb->eab", left, right, optimize=True)
        sv = np.clip(np.linalg.svd(prod, compute_uv=False), 0.0, 1.0)
        angles = np.arccos(sv[:, : min(a, b)])
        out[sel] = np.sqrt((angles * angles).sum(axis=1))
    return out
