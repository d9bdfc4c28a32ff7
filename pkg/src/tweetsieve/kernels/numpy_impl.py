"""Pure-numpy kernel implementations.

Fallback path for environments without a working numba; selected with
``TWEETSIEVE_BACKEND=numpy``. Edge-wise work is chunked by node ranges so
memory stays bounded on large graphs.
"""

from __future__ import annotations

import numpy as np

_TARGET_CHUNK_EDGES = 1 << 18


def _node_chunks(indptr: np.ndarray):
    """Yield (lo, hi) node ranges whose edge segments fit the chunk budget."""
    n = indptr.shape[0] - 1
    lo = 0
    while lo < n:
        hi = lo + 1
        while hi < n and indptr[hi + 1] - indptr[lo] <= _TARGET_CHUNK_EDGES:
            hi += 1
        yield lo, hi
        lo = hi


def gat_edge_forward(indptr, indices, z_self, z_neigh, attn, slope):
    n, d = z_self.shape
    nnz = indices.shape[0]
    deg = np.diff(indptr)
    dst = np.repeat(np.arange(n, dtype=np.int64), deg)
    e = np.empty(nnz, dtype=np.float64)
    for lo, hi in _node_chunks(indptr):
        sl = slice(indptr[lo], indptr[hi])
        s = z_self[dst[sl]] + z_neigh[indices[sl]]
        r = np.where(s > 0.0, s, slope * s)
        e[sl] = r @ attn
    seg_starts = indptr[:-1]
    seg_max = np.maximum.reduceat(e, seg_starts)
    ex = np.exp(e - np.repeat(seg_max, deg))
    denom = np.add.reduceat(ex, seg_starts)
    alpha = ex / np.repeat(denom, deg)
    out = np.empty((n, d), dtype=np.float64)
    for lo, hi in _node_chunks(indptr):
        sl = slice(indptr[lo], indptr[hi])
        weighted = alpha[sl, None] * z_neigh[indices[sl]]
        out[lo:hi] = np.add.reduceat(weighted, indptr[lo:hi] - indptr[lo], axis=0)
    return out, alpha


def gat_edge_backward(indptr, indices, z_self, z_neigh, attn, slope, alpha, dout):
    n, d = z_self.shape
    nnz = indices.shape[0]
    deg = np.diff(indptr)
    dst = np.repeat(np.arange(n, dtype=np.int64), deg)
    seg_starts = indptr[:-1]
    dalpha = np.empty(nnz, dtype=np.float64)
    for lo, hi in _node_chunks(indptr):
        sl = slice(indptr[lo], indptr[hi])
        dalpha[sl] = np.einsum("ij,ij->i", dout[dst[sl]], z_neigh[indices[sl]])
    sum_ad = np.add.reduceat(alpha * dalpha, seg_starts)
    de = alpha * (dalpha - np.repeat(sum_ad, deg))
    dz_self = np.zeros_like(z_self)
    dz_neigh = np.zeros_like(z_neigh)
    dattn = np.zeros_like(attn)
    for lo, hi in _node_chunks(indptr):
        sl = slice(indptr[lo], indptr[hi])
        s = z_self[dst[sl]] + z_neigh[indices[sl]]
        r = np.where(s > 0.0, s, slope * s)
        dattn += de[sl] @ r
        dr = de[sl, None] * attn[None, :]
        ds = np.where(s > 0.0, dr, slope * dr)
        dz_self[lo:hi] = np.add.reduceat(ds, indptr[lo:hi] - indptr[lo], axis=0)
        contrib = alpha[sl, None] * dout[dst[sl]] + ds
        np.add.at(dz_neigh, indices[sl], contrib)
    return dz_self, dz_neigh, dattn


def neighbor_counts(x, eps2):
    n = x.shape[0]
    sq = np.einsum("ij,ij->i", x, x)
    counts = np.empty(n, dtype=np.int64)
    chunk = max(1, (1 << 22) // max(n, 1))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        d2 = sq[lo:hi, None] + sq[None, :] - 2.0 * (x[lo:hi] @ x.T)
        counts[lo:hi] = (d2 <= eps2).sum(axis=1)
    return counts


def neighbors_within(x, queries, eps2):
    n = x.shape[0]
    sq = np.einsum("ij,ij->i", x, x)
    pieces = []
    offsets = np.zeros(queries.shape[0] + 1, dtype=np.int64)
    chunk = max(1, (1 << 22) // max(n, 1))
    pos = 0
    for lo in range(0, queries.shape[0], chunk):
        hi = min(queries.shape[0], lo + chunk)
        q = queries[lo:hi]
        d2 = sq[q, None] + sq[None, :] - 2.0 * (x[q] @ x.T)
        mask = d2 <= eps2
        for row in range(hi - lo):
            found = np.flatnonzero(mask[row]).astype(np.int64)
            pieces.append(found)
            pos += found.shape[0]
            offsets[lo + row + 1] = pos
    idx = np.concatenate(pieces) if pieces else np.empty(0, dtype=np.int64)
    return idx, offsets
