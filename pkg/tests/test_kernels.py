import numpy as np
import pytest

from conftest import make_graph
from tweetsieve.kernels import backend_name, get_backend

numba_impl = get_backend("numba")
numpy_impl = get_backend("numpy")


def random_csr(rng, n, extra_edges):
    edges = [(int(a), int(b)) for a, b in rng.integers(0, n, size=(extra_edges, 2))]
    return make_graph(n, edges)


def test_backend_selection_reports_a_known_name():
    assert backend_name() in ("numba", "numpy")
    with pytest.raises(ValueError):
        get_backend("fortran")


def test_gat_forward_backends_agree(rng):
    for _ in range(8):
        n = int(rng.integers(2, 40))
        d = int(rng.integers(1, 9))
        graph = random_csr(rng, n, int(rng.integers(0, 3 * n)))
        z_self = rng.normal(size=(n, d))
        z_neigh = rng.normal(size=(n, d))
        attn = rng.normal(size=d)
        out_a, alpha_a = numba_impl.gat_edge_forward(
            graph.indptr, graph.indices, z_self, z_neigh, attn, 0.2
        )
        out_b, alpha_b = numpy_impl.gat_edge_forward(
            graph.indptr, graph.indices, z_self, z_neigh, attn, 0.2
        )
        np.testing.assert_allclose(out_a, out_b, atol=1e-12)
        np.testing.assert_allclose(alpha_a, alpha_b, atol=1e-12)


def test_gat_backward_backends_agree(rng):
    for _ in range(8):
        n = int(rng.integers(2, 30))
        d = int(rng.integers(1, 7))
        graph = random_csr(rng, n, int(rng.integers(0, 2 * n)))
        z_self = rng.normal(size=(n, d))
        z_neigh = rng.normal(size=(n, d))
        attn = rng.normal(size=d)
        _, alpha = numba_impl.gat_edge_forward(graph.indptr, graph.indices, z_self, z_neigh, attn, 0.2)
        dout = rng.normal(size=(n, d))
        grads_a = numba_impl.gat_edge_backward(
            graph.indptr, graph.indices, z_self, z_neigh, attn, 0.2, alpha, dout
        )
        grads_b = numpy_impl.gat_edge_backward(
            graph.indptr, graph.indices, z_self, z_neigh, attn, 0.2, alpha, dout
        )
        for ga, gb in zip(grads_a, grads_b):
            np.testing.assert_allclose(ga, gb, atol=1e-12)


def test_neighbor_kernels_agree(rng):
    for _ in range(10):
        n = int(rng.integers(2, 200))
        d = int(rng.integers(1, 6))
        x = rng.normal(size=(n, d)) * rng.uniform(0.5, 2.0)
        eps2 = float(rng.uniform(0.1, 3.0)) ** 2
        counts_a = numba_impl.neighbor_counts(x, eps2)
        counts_b = numpy_impl.neighbor_counts(x, eps2)
        np.testing.assert_array_equal(counts_a, counts_b)
        queries = np.unique(rng.integers(0, n, size=min(n, 7))).astype(np.int64)
        idx_a, off_a = numba_impl.neighbors_within(x, queries, eps2)
        idx_b, off_b = numpy_impl.neighbors_within(x, queries, eps2)
        np.testing.assert_array_equal(off_a, off_b)
        np.testing.assert_array_equal(idx_a, idx_b)


def test_neighbor_counts_match_direct_definition(rng):
    n, d = 60, 3
    x = rng.normal(size=(n, d))
    eps = 1.0
    counts = numba_impl.neighbor_counts(x, eps * eps)
    d2 = ((x[:, None, :] - x[None, :, :]) ** 2).sum(-1)
    np.testing.assert_array_equal(counts, (d2 <= eps * eps).sum(1))
