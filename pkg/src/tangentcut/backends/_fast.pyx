# cython: language_level=3
"""Compiled kernels: per-point weighted scatter matrices and per-edge
principal-angle norms.  Signatures mirror ``reference``; small SVDs go
straight to LAPACK dgesvd."""

import numpy as np

cimport numpy as cnp
from libc.math cimport acos, sqrt
from scipy.linalg.cython_lapack cimport dgesvd

cnp.import_array()


def structure_matrices(double[:, ::1] data, long long[::1] indptr,
                       long long[::1] indices, double[::1] weights):
    cdef Py_ssize_t n = data.shape[0]
    cdef Py_ssize_t dim = data.shape[1]
    out = np.zeros((n, dim, dim), dtype=np.float64)
    cdef double[:, :, ::1] T = out
    diff_buf = np.empty(dim, dtype=np.float64)
    cdef double[::1] diff = diff_buf
    cdef Py_ssize_t i, s, a, b, j
    cdef double w2, v

    for i in range(n):
        for s in range(indptr[i], indptr[i + 1]):
            j = indices[s]
            w2 = weights[s] * weights[s]
            for a in range(dim):
                diff[a] = data[j, a] - data[i, a]
            for a in range(dim):
                v = w2 * diff[a]
                for b in range(a, dim):
                    T[i, a, b] += v * diff[b]
        for a in range(dim):
            for b in range(a + 1, dim):
                T[i, b, a] = T[i, a, b]
    return out


def edge_angle_norms(double[:, :, ::1] bases, long long[::1] dims,
                     long long[:, ::1] edges):
    cdef Py_ssize_t n_edges = edges.shape[0]
    cdef Py_ssize_t ambient = bases.shape[1]
    cdef Py_ssize_t dmax = bases.shape[2]
    out = np.empty(n_edges, dtype=np.float64)
    cdef double[::1] res = out

    # Fortran-order buffer for J_i^T J_j plus dgesvd workspace
    mat_buf = np.empty(dmax * dmax, dtype=np.float64)
    sv_buf = np.empty(dmax, dtype=np.float64)
    cdef int lwork = <int>(8 * dmax + 64)
    work_buf = np.empty(lwork, dtype=np.float64)
    cdef double[::1] mat = mat_buf
    cdef double[::1] sv = sv_buf
    cdef double[::1] work = work_buf

    cdef Py_ssize_t e, a, b, t
    cdef long long i, j
    cdef int m, nn, info, d_min, ldu = 1
    cdef double acc, s, total
    cdef char jobn = b'N'
    cdef double dummy = 0.0

    for e in range(n_edges):
        i = edges[e, 0]
        j = edges[e, 1]
        m = <int>dims[i]
        nn = <int>dims[j]
        d_min = m if m < nn else nn
        for b in range(nn):
            for a in range(m):
                acc = 0.0
                for t in range(ambient):
                    acc += bases[i, t, a] * bases[j, t, b]
                mat[a + b * m] = acc
        dgesvd(&jobn, &jobn, &m, &nn, &mat[0], &m, &sv[0],
               &dummy, &ldu, &dummy, &ldu, &work[0], &lwork, &info)
        if info != 0:
            raise np.linalg.LinAlgError(f"dgesvd failed on edge {e} (info={info})")
        total = 0.0
        for a in range(d_min):
            s = sv[a]
            if s > 1.0:
                s = 1.0
            elif s < 0.0:
                s = 0.0
            s = acos(s)
            total += s * s
        res[e] = sqrt(total)
    return out
