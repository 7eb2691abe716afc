"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--nodes 2000] [--repeat 3]

Both backends run on the same grown graph; results are checked for agreement
before any timing is reported.
"""
import argparse
import time

import numpy as np
import scipy.sparse as sp

from sfsync import kernels
from sfsync.generator import GenParams, grow


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--nodes", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--steps", type=int, default=2000)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the Python backend is available")

    g = grow(GenParams(n_target=args.nodes, seed=1)).final
    indptr, indices = g.undirected_csr()
    n = g.n_nodes
    # diffusive coupling with zero row sums, scaled so that forward Euler is stable
    adj = sp.csr_matrix((np.ones(len(indices)), indices, indptr), shape=(n, n))
    c = (adj - sp.diags(np.asarray(adj.sum(axis=1)).ravel())).tocsr()
    c_ptr, c_idx = c.indptr.astype(np.int64), c.indices.astype(np.int64)
    h = 0.5 / np.abs(c.diagonal()).max()
    x0 = np.random.default_rng(0).uniform(-1, 1, n)

    print(f"graph: {n} nodes, {len(indices) // 2} undirected edges; default backend: {kernels.BACKEND}")
    results = {}
    for name, mod in backends.items():
        bet, dsum, reach = mod.brandes_closeness(indptr, indices)
        x = x0.copy()
        mod.euler_csr(c_ptr, c_idx, c.data, x, h, args.steps, 0, 0.0, 1.0)
        results[name] = (bet, dsum, x)

        t_brandes = best_of(lambda: mod.brandes_closeness(indptr, indices), args.repeat)

        def euler():
            mod.euler_csr(c_ptr, c_idx, c.data, x0.copy(), h, args.steps, 0, 0.0, 1.0)

        t_euler = best_of(euler, args.repeat)
        results[name] += (t_brandes, t_euler)
        print(f"{name:>9}: brandes {t_brandes * 1e3:9.1f} ms   euler x{args.steps} {t_euler * 1e3:9.1f} ms")

    if len(results) == 2:
        a, b = results["compiled"], results["python"]
        assert np.allclose(a[0], b[0], rtol=1e-12, atol=1e-9), "betweenness differs"
        assert np.array_equal(a[1], b[1]), "distance sums differ"
        assert np.allclose(a[2], b[2], rtol=1e-10, atol=1e-12), "euler states differ"
        print(f"speedup: brandes {b[3] / a[3]:.1f}x, euler {b[4] / a[4]:.1f}x (outputs agree)")


if __name__ == "__main__":
    main()
