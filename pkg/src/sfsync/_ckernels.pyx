# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph and integration kernels.

All graph kernels take a CSR adjacency (``indptr``, ``indices``) of a simple
graph with dense node ids.  Signatures and return values match
:mod:`sfsync._pykernels` exactly; the test suite checks the two against each
other.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite

cnp.import_array()

ctypedef cnp.int64_t i64


def bfs(i64[::1] indptr, i64[::1] indices, i64 source):
    """Single-source BFS returning (dist, sigma, order).

    ``dist`` is -1 for unreachable nodes, ``sigma`` counts shortest paths and
    ``order`` lists reached nodes in non-decreasing distance.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    dist_a = np.full(n, -1, dtype=np.int64)
    sigma_a = np.zeros(n, dtype=np.float64)
    order_a = np.empty(n, dtype=np.int64)
    cdef i64[::1] dist = dist_a
    cdef double[::1] sigma = sigma_a
    cdef i64[::1] order = order_a
    cdef Py_ssize_t head = 0, tail = 0, k
    cdef i64 v, w
    dist[source] = 0
    sigma[source] = 1.0
    order[tail] = source
    tail += 1
    while head < tail:
        v = order[head]
        head += 1
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                order[tail] = w
                tail += 1
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
    return dist_a, sigma_a, order_a[:tail].copy()


def brandes_closeness(i64[::1] indptr, i64[::1] indices):
    """All-sources sweep: Brandes dependencies plus distance sums.

    Returns (bet, dist_sum, reach).  ``bet`` sums pair dependencies over
    ordered (s, t) pairs, so each unordered pair of an undirected graph is
    counted twice.  ``reach`` includes the node itself.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    bet_a = np.zeros(n, dtype=np.float64)
    dsum_a = np.zeros(n, dtype=np.int64)
    reach_a = np.zeros(n, dtype=np.int64)
    cdef double[::1] bet = bet_a
    cdef i64[::1] dsum = dsum_a
    cdef i64[::1] reach = reach_a
    cdef i64[::1] dist = np.empty(n, dtype=np.int64)
    cdef double[::1] sigma = np.empty(n, dtype=np.float64)
    cdef double[::1] delta = np.empty(n, dtype=np.float64)
    cdef i64[::1] order = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t s, i, head, tail, k
    cdef i64 v, w, total
    cdef double coeff
    for s in range(n):
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head = 0
        tail = 1
        total = 0
        while head < tail:
            v = order[head]
            head += 1
            total += dist[v]
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        dsum[s] = total
        reach[s] = tail
        # reverse BFS order; predecessors are neighbours one level closer
        for i in range(tail - 1, 0, -1):
            w = order[i]
            coeff = (1.0 + delta[w]) / sigma[w]
            for k in range(indptr[w], indptr[w + 1]):
                v = indices[k]
                if dist[v] == dist[w] - 1:
                    delta[v] += sigma[v] * coeff
            bet[w] += delta[w]
    return bet_a, dsum_a, reach_a


def euler_csr(i64[::1] indptr, i64[::1] indices, double[::1] data,
              double[::1] x, double h, i64 steps, int f_kind,
              double f_param, double inner):
    """Advance scalar states ``steps`` forward-Euler steps in place.

    dx_i = f(x_i) + inner * sum_j C_ij x_j with C in CSR form (diagonal
    included when present).  ``f_kind``: 0 zero, 1 linear decay
    ``-f_param * x``, 2 logistic ``f_param * x * (1 - x)``.

    Returns (step, node) of the first non-finite value, or (-1, -1).
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef double[::1] dx = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i, k
    cdef i64 st
    cdef double acc, xi
    for st in range(steps):
        for i in range(n):
            acc = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                acc += data[k] * x[indices[k]]
            xi = x[i]
            if f_kind == 1:
                dx[i] = -f_param * xi + inner * acc
            elif f_kind == 2:
                dx[i] = f_param * xi * (1.0 - xi) + inner * acc
            else:
                dx[i] = inner * acc
        for i in range(n):
            x[i] = x[i] + h * dx[i]
            if not isfinite(x[i]):
                return st, i
    return -1, -1
