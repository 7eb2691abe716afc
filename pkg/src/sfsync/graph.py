"""Directed multigraph with dense integer node ids.

Node ids are ``0..N-1`` and never reused, so every per-node quantity elsewhere
in the package is a plain numpy array indexed by node id.  Edge ids are
assigned sequentially and stay valid until the edge is removed.

Centralities and degree-distribution analysis use the *undirected
projection*: orientation dropped, parallel edges collapsed, self-loops
dropped.  The multigraph degree (``in + out``, a self-loop counting 2) is what
:func:`isolated_nodes` and :func:`max_degree_hub` look at.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sfsync import kernels
from sfsync.errors import EmptyGraph, FrozenGraphError, UnknownEdge, UnknownNode


class Graph:
    """Directed multigraph.  Parallel edges and self-loops are allowed."""

    def __init__(self, n_nodes: int = 0):
        self._src: list[int] = []
        self._dst: list[int] = []
        self._alive: list[bool] = []
        self._out: list[dict[int, None]] = [{} for _ in range(n_nodes)]
        self._in: list[dict[int, None]] = [{} for _ in range(n_nodes)]
        self._n_edges = 0
        self._n_self_loops = 0
        self._frozen = False
        self._cache: dict = {}

    # -- size ---------------------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return len(self._out)

    @property
    def n_edges(self) -> int:
        return self._n_edges

    @property
    def n_self_loops(self) -> int:
        return self._n_self_loops

    @property
    def frozen(self) -> bool:
        return self._frozen

    def __len__(self):
        return self.n_nodes

    def __repr__(self):
        tag = ", frozen" if self._frozen else ""
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges}{tag})"

    # -- mutation -----------------------------------------------------------
    def _check_mutable(self):
        if self._frozen:
            raise FrozenGraphError("graph is frozen")
        self._cache.clear()

    def _check_node(self, u):
        if not (0 <= u < self.n_nodes):
            raise UnknownNode(u)

    def add_node(self) -> int:
        self._check_mutable()
        self._out.append({})
        self._in.append({})
        return self.n_nodes - 1

    def add_nodes(self, count: int) -> range:
        start = self.n_nodes
        for _ in range(count):
            self.add_node()
        return range(start, self.n_nodes)

    def add_edge(self, u: int, v: int) -> int:
        self._check_mutable()
        self._check_node(u)
        self._check_node(v)
        eid = len(self._src)
        self._src.append(u)
        self._dst.append(v)
        self._alive.append(True)
        self._out[u][eid] = None
        self._in[v][eid] = None
        self._n_edges += 1
        if u == v:
            self._n_self_loops += 1
        return eid

    def add_edges(self, us, vs) -> range:
        """Add edges ``(us[k], vs[k])`` in order; returns the new edge ids."""
        self._check_mutable()
        us = [int(u) for u in us]
        vs = [int(v) for v in vs]
        if len(us) != len(vs):
            raise ValueError("endpoint arrays differ in length")
        for u in us + vs:
            self._check_node(u)
        start = len(self._src)
        self._src.extend(us)
        self._dst.extend(vs)
        self._alive.extend([True] * len(us))
        for eid, (u, v) in enumerate(zip(us, vs), start):
            self._out[u][eid] = None
            self._in[v][eid] = None
            if u == v:
                self._n_self_loops += 1
        self._n_edges += len(us)
        return range(start, len(self._src))

    def remove_edge(self, e: int) -> None:
        self._check_mutable()
        if not (0 <= e < len(self._src)) or not self._alive[e]:
            raise UnknownEdge(e)
        u, v = self._src[e], self._dst[e]
        del self._out[u][e]
        del self._in[v][e]
        self._alive[e] = False
        self._n_edges -= 1
        if u == v:
            self._n_self_loops -= 1

    def freeze(self) -> "Graph":
        """Make the graph immutable (in place) and return it."""
        self._frozen = True
        return self

    def copy(self) -> "Graph":
        """Mutable copy preserving node and edge ids."""
        g = Graph.__new__(Graph)
        g._src = list(self._src)
        g._dst = list(self._dst)
        g._alive = list(self._alive)
        g._out = [dict(d) for d in self._out]
        g._in = [dict(d) for d in self._in]
        g._n_edges = self._n_edges
        g._n_self_loops = self._n_self_loops
        g._frozen = False
        g._cache = {}
        return g

    # -- queries ------------------------------------------------------------
    def endpoints(self, e: int) -> tuple[int, int]:
        if not (0 <= e < len(self._src)) or not self._alive[e]:
            raise UnknownEdge(e)
        return self._src[e], self._dst[e]

    def edges(self) -> list[tuple[int, int, int]]:
        """Live edges as ``(edge_id, u, v)`` in edge-id order."""
        return [(e, u, v) for e, (u, v, a) in
                enumerate(zip(self._src, self._dst, self._alive)) if a]

    def edge_array(self) -> np.ndarray:
        """Live edges as an ``(|E|, 2)`` int64 array in edge-id order."""
        # cache is cleared by every mutation
        if "edge_array" not in self._cache:
            alive = np.asarray(self._alive, dtype=bool)
            arr = np.column_stack([np.asarray(self._src, dtype=np.int64)[alive],
                                   np.asarray(self._dst, dtype=np.int64)[alive]])
            self._cache["edge_array"] = arr.reshape(-1, 2)
        return self._cache["edge_array"]

    def out_edges(self, u: int) -> list[int]:
        self._check_node(u)
        return list(self._out[u])

    def in_edges(self, u: int) -> list[int]:
        self._check_node(u)
        return list(self._in[u])

    def out_degree(self, u: int) -> int:
        self._check_node(u)
        return len(self._out[u])

    def in_degree(self, u: int) -> int:
        self._check_node(u)
        return len(self._in[u])

    def degree(self, u: int) -> int:
        return self.out_degree(u) + self.in_degree(u)

    def degrees(self) -> "DegreeView":
        return DegreeView(
            in_degree=np.fromiter((len(d) for d in self._in), dtype=np.int64, count=self.n_nodes),
            out_degree=np.fromiter((len(d) for d in self._out), dtype=np.int64, count=self.n_nodes),
        )

    def undirected_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR ``(indptr, indices)`` of the simple undirected projection."""
        return self._csr("undirected")

    def directed_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR of the simple directed graph (parallel edges and loops dropped)."""
        return self._csr("directed")

    def _csr(self, mode):
        key = ("csr", mode)
        if key in self._cache:
            return self._cache[key]
        n = self.n_nodes
        arr = self.edge_array()
        u, v = arr[:, 0], arr[:, 1]
        keep = u != v
        u, v = u[keep], v[keep]
        if mode == "undirected":
            u, v = np.concatenate([u, v]), np.concatenate([v, u])
        codes = np.unique(u * max(n, 1) + v)
        rows, cols = codes // max(n, 1), codes % max(n, 1)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        out = (indptr, cols.astype(np.int64))
        self._cache[key] = out
        return out

    def projected_degrees(self) -> np.ndarray:
        """Degrees in the simple undirected projection (distinct neighbours)."""
        indptr, _ = self.undirected_csr()
        return np.diff(indptr)

    def n_projected_edges(self) -> int:
        return int(self.undirected_csr()[1].shape[0] // 2)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n_nodes == other.n_nodes
                and np.array_equal(self.edge_array(), other.edge_array()))

    __hash__ = None


@dataclass(frozen=True)
class DegreeView:
    in_degree: np.ndarray
    out_degree: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.in_degree + self.out_degree


@dataclass(frozen=True)
class ShortestPathData:
    """Single-source BFS result.  ``dist`` is ``inf`` and ``sigma`` 0 when unreachable."""

    source: int
    dist: np.ndarray
    sigma: np.ndarray
    predecessors: list[list[int]]


def bfs_shortest_paths(g: Graph, source: int, mode: str = "undirected") -> ShortestPathData:
    """Hop distances, shortest-path counts and predecessor sets from ``source``."""
    if not (0 <= source < g.n_nodes):
        raise UnknownNode(source)
    if mode == "undirected":
        indptr, indices = g.undirected_csr()
    elif mode == "directed":
        indptr, indices = g.directed_csr()
    else:
        raise ValueError(f"mode must be 'directed' or 'undirected', got {mode!r}")
    dist_i, sigma, order = kernels.bfs(indptr, indices, source)
    dist = np.where(dist_i < 0, np.inf, dist_i.astype(float))
    preds: list[list[int]] = [[] for _ in range(g.n_nodes)]
    for v in order:
        for w in indices[indptr[v]:indptr[v + 1]]:
            if dist_i[w] == dist_i[v] + 1:
                preds[w].append(int(v))
    return ShortestPathData(source, dist, sigma, preds)


def isolated_nodes(g: Graph) -> list[int]:
    """Nodes with multigraph degree 0, ascending.  A self-loop counts as degree."""
    return [int(i) for i in np.flatnonzero(g.degrees().total == 0)]


def max_degree_hub(g: Graph) -> int:
    """Node of maximum total degree; ties go to the smallest id."""
    if g.n_nodes == 0:
        raise EmptyGraph("graph has no nodes")
    return int(np.argmax(g.degrees().total))


def from_edges(n_nodes: int, edges) -> Graph:
    g = Graph(n_nodes)
    for u, v in edges:
        g.add_edge(int(u), int(v))
    return g


# -- edge-list text format -------------------------------------------------
# One "u v" pair per line, '#' starts a comment.  The dumper writes a
# "# nodes: N" header so isolated trailing nodes survive the round trip.

def write_edgelist(g: Graph, path, comments: list[str] | None = None) -> None:
    lines = [f"# nodes: {g.n_nodes}"]
    lines += [f"# {c}" for c in comments or []]
    lines += [f"{u} {v}" for u, v in g.edge_array().tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edgelist(path) -> Graph:
    n_nodes = None
    pairs = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line, _, comment = raw.partition("#")
        comment = comment.strip()
        if comment.startswith("nodes:") and n_nodes is None:
            n_nodes = int(comment.split(":", 1)[1])
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'u v', got {raw!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    top = max((max(p) for p in pairs), default=-1) + 1
    if n_nodes is None:
        n_nodes = top
    elif top > n_nodes:
        raise UnknownNode(top - 1)
    return from_edges(n_nodes, pairs)


@dataclass(frozen=True)
class PhaseSnapshot:
    """Frozen topology plus (optionally) node states at one phase.

    ``step`` is the growth step (or simulation step) at which it was taken.
    """

    graph: Graph
    states: object = None
    phase: int = 0
    step: int = 0

    def __post_init__(self):
        if not self.graph.frozen:
            object.__setattr__(self, "graph", self.graph.copy().freeze())
