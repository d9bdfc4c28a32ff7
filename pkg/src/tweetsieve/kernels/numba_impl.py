"""Numba-compiled kernel implementations (default backend).

The density-scan kernels dispatch on dimensionality: below
``DENSE_DIM_THRESHOLD`` the scalar loops win on their early abort, above
it a single-threaded scalar scan loses badly to BLAS, so the chunked
matrix form from the numpy implementation takes over. Both scan
functions dispatch on the same rule, so one clustering run always uses
one arithmetic.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

from . import numpy_impl

DENSE_DIM_THRESHOLD = 32


@njit(cache=True)
def gat_edge_forward(indptr, indices, z_self, z_neigh, attn, slope):
    n = z_self.shape[0]
    d = z_self.shape[1]
    nnz = indices.shape[0]
    out = np.zeros((n, d), dtype=np.float64)
    alpha = np.empty(nnz, dtype=np.float64)
    e = np.empty(nnz, dtype=np.float64)
    for v in range(n):
        start = indptr[v]
        end = indptr[v + 1]
        m = -1.0e308
        for j in range(start, end):
            u = indices[j]
            acc = 0.0
            for k in range(d):
                s = z_self[v, k] + z_neigh[u, k]
                if s <= 0.0:
                    s *= slope
                acc += attn[k] * s
            e[j] = acc
            if acc > m:
                m = acc
        denom = 0.0
        for j in range(start, end):
            ex = np.exp(e[j] - m)
            alpha[j] = ex
            denom += ex
        for j in range(start, end):
            alpha[j] /= denom
            u = indices[j]
            a = alpha[j]
            for k in range(d):
                out[v, k] += a * z_neigh[u, k]
    return out, alpha


@njit(cache=True)
def gat_edge_backward(indptr, indices, z_self, z_neigh, attn, slope, alpha, dout):
    n = z_self.shape[0]
    d = z_self.shape[1]
    dz_self = np.zeros_like(z_self)
    dz_neigh = np.zeros_like(z_neigh)
    dattn = np.zeros_like(attn)
    for v in range(n):
        start = indptr[v]
        end = indptr[v + 1]
        sum_ad = 0.0
        for j in range(start, end):
            u = indices[j]
            da = 0.0
            for k in range(d):
                da += dout[v, k] * z_neigh[u, k]
            sum_ad += alpha[j] * da
        for j in range(start, end):
            u = indices[j]
            da = 0.0
            for k in range(d):
                da += dout[v, k] * z_neigh[u, k]
            de = alpha[j] * (da - sum_ad)
            for k in range(d):
                s = z_self[v, k] + z_neigh[u, k]
                if s > 0.0:
                    r = s
                    grad_gate = 1.0
                else:
                    r = slope * s
                    grad_gate = slope
                dattn[k] += de * r
                ds = de * attn[k] * grad_gate
                dz_self[v, k] += ds
                dz_neigh[u, k] += ds + alpha[j] * dout[v, k]
    return dz_self, dz_neigh, dattn


def neighbor_counts(x, eps2):
    if x.shape[1] >= DENSE_DIM_THRESHOLD:
        return numpy_impl.neighbor_counts(x, eps2)
    return _neighbor_counts_scalar(x, eps2)


def neighbors_within(x, queries, eps2):
    if x.shape[1] >= DENSE_DIM_THRESHOLD:
        return numpy_impl.neighbors_within(x, queries, eps2)
    return _neighbors_within_scalar(x, queries, eps2)


@njit(cache=True, parallel=True)
def _neighbor_counts_scalar(x, eps2):
    n = x.shape[0]
    d = x.shape[1]
    counts = np.zeros(n, dtype=np.int64)
    for i in prange(n):
        c = 0
        for j in range(n):
            acc = 0.0
            for k in range(d):
                diff = x[i, k] - x[j, k]
                acc += diff * diff
                if acc > eps2:
                    break
            if acc <= eps2:
                c += 1
        counts[i] = c
    return counts


@njit(cache=True, parallel=True)
def _neighbors_within_scalar(x, queries, eps2):
    n = x.shape[0]
    d = x.shape[1]
    nq = queries.shape[0]
    per_query = np.zeros(nq, dtype=np.int64)
    for qi in prange(nq):
        i = queries[qi]
        c = 0
        for j in range(n):
            acc = 0.0
            for k in range(d):
                diff = x[i, k] - x[j, k]
                acc += diff * diff
                if acc > eps2:
                    break
            if acc <= eps2:
                c += 1
        per_query[qi] = c
    offsets = np.zeros(nq + 1, dtype=np.int64)
    for qi in range(nq):
        offsets[qi + 1] = offsets[qi] + per_query[qi]
    idx = np.empty(offsets[nq], dtype=np.int64)
    for qi in prange(nq):
        i = queries[qi]
        pos = offsets[qi]
        for j in range(n):
            acc = 0.0
            for k in range(d):
                diff = x[i, k] - x[j, k]
                acc += diff * diff
                if acc > eps2:
                    break
            if acc <= eps2:
                idx[pos] = j
                pos += 1
    return idx, offsets
