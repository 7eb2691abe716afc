"""Degree, pagerank, betweenness and closeness centrality.

Everything is computed on the simple undirected projection of the graph (see
:mod:`sfsync.graph`).  Betweenness uses Brandes' dependency accumulation and
is normalised by ``(N-1)(N-2)``, i.e. ``2 / (N^2 - 3N + 2)`` over unordered
pairs.  :func:`brute_force_betweenness` enumerates every shortest path and
exists to check the fast version.
"""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from sfsync import kernels
from sfsync.errors import GraphTooLarge, NoConvergence, TooFewNodes
from sfsync.graph import Graph

MEASURES = ("degree", "pagerank", "betweenness", "closeness")


def _require(g: Graph, n_min: int):
    if g.n_nodes < n_min:
        raise TooFewNodes(f"need at least {n_min} nodes, graph has {g.n_nodes}")


def degree_centrality(g: Graph) -> np.ndarray:
    _require(g, 2)
    return g.projected_degrees() / (g.n_nodes - 1)


@dataclass
class PagerankInfo:
    iterations: int
    residual: float
    # isolated nodes had their mass spread uniformly (undefined under damping 1)
    isolated_redistributed: bool = False
    averaged: bool = False


def pagerank_centrality(g: Graph, damping: float = 0.85, tol: float = 1e-10,
                        max_iter: int = 100_000, return_info: bool = False):
    """Stationary vector of the damped random walk on the undirected projection.

    ``pi_k = (1 - d)/N + d * sum_{i ~ k} pi_i / deg(i)``, normalised to sum 1.
    Mass sitting on isolated nodes is redistributed uniformly.  With
    ``damping == 1`` each iterate is averaged with the previous one (a lazy
    walk), which has the same fixed point but does not oscillate on bipartite
    graphs.  Iteration stops when the L1 change drops below ``tol``.
    """
    _require(g, 1)
    if not (0 < damping <= 1):
        raise ValueError(f"damping must lie in (0, 1], got {damping}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = g.n_nodes
    indptr, indices = g.undirected_csr()
    deg = np.diff(indptr).astype(float)
    dangling = deg == 0
    inv = np.divide(1.0, deg, out=np.zeros(n), where=~dangling)
    # column-stochastic on non-isolated columns: M[k, i] = 1/deg(i) for i ~ k
    m = sp.csr_matrix((inv[indices], indices, indptr), shape=(n, n))
    lazy = damping == 1.0
    pi = np.full(n, 1.0 / n)
    residual = np.inf
    for it in range(1, max_iter + 1):
        nxt = damping * (m @ pi + pi[dangling].sum() / n) + (1.0 - damping) / n
        if lazy:
            nxt = 0.5 * (nxt + pi)
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - pi).sum())
        pi = nxt
        if residual < tol:
            break
    else:
        raise NoConvergence(f"pagerank did not converge in {max_iter} iterations "
                            f"(residual {residual:.3e})", residual=residual, iterations=max_iter)
    if return_info:
        return pi, PagerankInfo(it, residual, bool(dangling.any()), lazy)
    return pi


def betweenness_centrality(g: Graph) -> np.ndarray:
    _require(g, 3)
    indptr, indices = g.undirected_csr()
    bet, _, _ = kernels.brandes_closeness(indptr, indices)
    n = g.n_nodes
    return bet / ((n - 1) * (n - 2))


def _closeness_from_sums(dsum, reach, n):
    # (c-1)^2 / ((N-1) * sum d) reduces to (N-1)/sum d on connected graphs
    c1 = (reach - 1).astype(float)
    out = np.zeros(n)
    ok = dsum > 0
    out[ok] = c1[ok] ** 2 / ((n - 1) * dsum[ok])
    return out


def closeness_centrality(g: Graph) -> np.ndarray:
    """``(N-1) / sum_i d(i, k)`` with the Wasserman-Faust scaling on disconnected graphs."""
    _require(g, 2)
    indptr, indices = g.undirected_csr()
    _, dsum, reach = kernels.brandes_closeness(indptr, indices)
    return _closeness_from_sums(dsum, reach, g.n_nodes)


BRUTE_FORCE_MAX_N = 12


def brute_force_betweenness(g: Graph) -> np.ndarray:
    """Betweenness by listing every shortest path of every node pair.

    Exponential in the worst case; refuses graphs above 12 nodes.
    """
    n = g.n_nodes
    if n > BRUTE_FORCE_MAX_N:
        raise GraphTooLarge(f"brute force limited to {BRUTE_FORCE_MAX_N} nodes, got {n}")
    _require(g, 3)
    adj = [set() for _ in range(n)]
    for _, u, v in g.edges():
        if u != v:
            adj[u].add(v)
            adj[v].add(u)

    def hop_distances(s):
        dist = [None] * n
        dist[s] = 0
        q = deque([s])
        while q:
            v = q.popleft()
            for w in adj[v]:
                if dist[w] is None:
                    dist[w] = dist[v] + 1
                    q.append(w)
        return dist

    def all_shortest(s, t, dist_to_t):
        # extend s->...->v one hop at a time, only along edges that close distance to t
        paths = [[s]]
        while paths[0][-1] != t:
            paths = [p + [w] for p in paths for w in sorted(adj[p[-1]])
                     if dist_to_t[w] is not None and dist_to_t[w] == dist_to_t[p[-1]] - 1]
        return paths

    score = np.zeros(n)
    dists = [hop_distances(v) for v in range(n)]
    for t in range(n):
        for s in range(t):
            if dists[t][s] is None:
                continue
            paths = all_shortest(s, t, dists[t])
            for p in paths:
                for k in p[1:-1]:
                    score[k] += 1.0 / len(paths)
    return 2.0 * score / (n * n - 3 * n + 2)


@dataclass
class CentralityTable:
    degree: np.ndarray
    pagerank: np.ndarray
    betweenness: np.ndarray
    closeness: np.ndarray
    n: int
    meta: dict = field(default_factory=dict)

    def as_matrix(self) -> np.ndarray:
        """``(N, 4)`` array, columns in :data:`MEASURES` order."""
        return np.column_stack([self.degree, self.pagerank, self.betweenness, self.closeness])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node_id", "degree_c", "pagerank_c", "betweenness_c", "closeness_c"])
            for i, row in enumerate(self.as_matrix()):
                w.writerow([i] + [repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path) -> "CentralityTable":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        rows.sort(key=lambda r: int(r["node_id"]))
        cols = {k: np.array([float(r[k + "_c"]) for r in rows]) for k in MEASURES}
        return cls(n=len(rows), **cols)


def centrality_table(g: Graph, damping: float = 0.85, tol: float = 1e-10,
                     max_iter: int = 100_000) -> CentralityTable:
    """All four measures on one snapshot; one all-sources BFS sweep serves two of them."""
    _require(g, 3)
    n = g.n_nodes
    indptr, indices = g.undirected_csr()
    bet, dsum, reach = kernels.brandes_closeness(indptr, indices)
    pr, info = pagerank_centrality(g, damping, tol, max_iter, return_info=True)
    return CentralityTable(
        degree=np.diff(indptr) / (n - 1),
        pagerank=pr,
        betweenness=bet / ((n - 1) * (n - 2)),
        closeness=_closeness_from_sums(dsum, reach, n),
        n=n,
        meta={"pagerank_iterations": info.iterations,
              "pagerank_isolated_redistributed": info.isolated_redistributed},
    )

