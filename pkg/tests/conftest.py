import numpy as np
import pytest

from tweetsieve.trg import TweetRelationGraph


def make_graph(n, edges, self_loops=True):
    """Small-graph CSR builder for tests."""
    adj = {v: set() for v in range(n)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    if self_loops:
        for v in range(n):
            adj[v].add(v)
    indptr = [0]
    indices = []
    for v in range(n):
        nb = sorted(adj[v])
        indices.extend(nb)
        indptr.append(len(indices))
    return TweetRelationGraph(
        n=n,
        indptr=np.asarray(indptr, dtype=np.int64),
        indices=np.asarray(indices, dtype=np.int64),
        self_loops=self_loops,
        tweet_ids=tuple(str(i) for i in range(n)),
    )


def dense_gat_forward(graph, x, params):
    """Dense masked-attention oracle, independent of the CSR kernels."""
    h = np.asarray(x, dtype=np.float64)
    n_layers = len(params.layers)
    for li, layer in enumerate(params.layers):
        outs = []
        for hd in range(layer.heads):
            zs = h @ layer.w_self[hd].T
            zn = h @ layer.w_neigh[hd].T
            scores = np.full((graph.n, graph.n), -np.inf)
            for v in range(graph.n):
                for u in graph.neighbors(v):
                    s = zs[v] + zn[u]
                    r = np.where(s > 0, s, layer.leaky_slope * s)
                    scores[v, u] = layer.attn[hd] @ r
            alpha = np.zeros((graph.n, graph.n))
            for v in range(graph.n):
                row = scores[v]
                m = row[np.isfinite(row)].max()
                ex = np.where(np.isfinite(row), np.exp(row - m), 0.0)
                alpha[v] = ex / ex.sum()
            outs.append(alpha @ zn)
        if li == n_layers - 1:
            h = outs[0] if layer.heads == 1 else np.mean(outs, axis=0)
        else:
            pre = outs[0] if layer.heads == 1 else np.concatenate(outs, axis=1)
            h = np.where(pre > 0, pre, np.expm1(pre))
    return h


def reference_dbscan(x, eps, min_pts):
    """Naive O(n^2) density clustering with the same border tie-break."""
    n = len(x)
    d2 = ((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=-1)
    neigh = [np.flatnonzero(d2[i] <= eps * eps) for i in range(n)]
    core = np.asarray([len(nb) >= min_pts for nb in neigh])
    labels = np.full(n, -1, dtype=np.int64)
    cid = 0
    for i in range(n):
        if not core[i] or labels[i] >= 0:
            continue
        labels[i] = cid
        queue = [i]
        while queue:
            q = queue.pop(0)
            for j in neigh[q]:
                if labels[j] < 0:
                    labels[j] = cid
                    if core[j]:
                        queue.append(j)
        cid += 1
    return labels


def canonical_labels(labels):
    """Rename cluster ids by order of first appearance; noise stays -1."""
    out = np.full(len(labels), -1, dtype=np.int64)
    mapping = {}
    for i, lab in enumerate(labels):
        if lab < 0:
            continue
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[i] = mapping[lab]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
