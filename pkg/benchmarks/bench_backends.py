#!/usr/bin/env python3
"""Compare the numba kernels against the pure-numpy fallback.

Times the attention edge kernels (forward + backward) and the density
scan kernels on synthetic workloads of increasing size. Run:

    python benchmarks/bench_backends.py [--sizes 2000,8000]

The active package backend is irrelevant here; both implementations are
loaded explicitly.
"""

import argparse
import time

import numpy as np

from tweetsieve.kernels import get_backend


def random_csr(rng, n, avg_degree):
    pairs = rng.integers(0, n, size=(n * avg_degree // 2, 2))
    codes = np.concatenate(
        [pairs[:, 0] * n + pairs[:, 1], pairs[:, 1] * n + pairs[:, 0], np.arange(n) * n + np.arange(n)]
    )
    codes = np.unique(codes)
    rows, cols = codes // n, codes % n
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return indptr, cols.astype(np.int64)


def timeit(fn, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_gat(backend, indptr, indices, inputs):
    impl = get_backend(backend)
    z_self, z_neigh, attn, dout = inputs
    fwd_t, (out, alpha) = timeit(
        lambda: impl.gat_edge_forward(indptr, indices, z_self, z_neigh, attn, 0.2)
    )
    bwd_t, _ = timeit(
        lambda: impl.gat_edge_backward(indptr, indices, z_self, z_neigh, attn, 0.2, alpha, dout)
    )
    return fwd_t, bwd_t, out


def bench_dbscan(backend, x, eps2):
    impl = get_backend(backend)
    count_t, counts = timeit(lambda: impl.neighbor_counts(x, eps2))
    queries = np.arange(0, x.shape[0], max(1, x.shape[0] // 256), dtype=np.int64)
    query_t, _ = timeit(lambda: impl.neighbors_within(x, queries, eps2))
    return count_t, query_t, counts


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="2000,8000")
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--degree", type=int, default=16)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)

    # warm up the JIT so compile time stays out of the numbers
    warm_indptr, warm_indices = random_csr(rng, 64, 8)
    warm_inputs = (
        rng.normal(size=(64, 8)),
        rng.normal(size=(64, 8)),
        rng.normal(size=8),
        rng.normal(size=(64, 8)),
    )
    bench_gat("numba", warm_indptr, warm_indices, warm_inputs)
    bench_dbscan("numba", rng.normal(size=(64, 8)), 1.0)

    print(f"{'kernel':<26} {'n':>7} {'numba (s)':>10} {'numpy (s)':>10} {'speedup':>8}")
    for n in sizes:
        indptr, indices = random_csr(rng, n, args.degree)
        inputs = (
            rng.normal(size=(n, args.dim)),
            rng.normal(size=(n, args.dim)),
            rng.normal(size=args.dim),
            rng.normal(size=(n, args.dim)),
        )
        results = {}
        for backend in ("numba", "numpy"):
            fwd, bwd, out = bench_gat(backend, indptr, indices, inputs)
            results[backend] = (fwd, bwd, out)
        assert np.allclose(results["numba"][2], results["numpy"][2], atol=1e-10)
        fa, ba = results["numba"][:2]
        fb, bb = results["numpy"][:2]
        print(f"{'attention forward':<26} {n:>7} {fa:>10.4f} {fb:>10.4f} {fb / fa:>7.1f}x")
        print(f"{'attention backward':<26} {n:>7} {ba:>10.4f} {bb:>10.4f} {bb / ba:>7.1f}x")

        x = rng.normal(size=(n, 16))
        res = {}
        for backend in ("numba", "numpy"):
            res[backend] = bench_dbscan(backend, x, 4.0)
        assert np.array_equal(res["numba"][2], res["numpy"][2])
        ca, qa = res["numba"][:2]
        cb, qb = res["numpy"][:2]
        print(f"{'neighbor counts':<26} {n:>7} {ca:>10.4f} {cb:>10.4f} {cb / ca:>7.1f}x")
        print(f"{'neighbor queries':<26} {n:>7} {qa:>10.4f} {qb:>10.4f} {qb / qa:>7.1f}x")


if __name__ == "__main__":
    main()
