"""Topology change between phases.

:func:`rewire_phase` drops edges whose endpoints disagree in state when one
endpoint has low degree, then adds a small budget of preferentially attached
edges.  :func:`repair_isolated` reconnects every isolated node to the hub so
no node is left without a neighbour.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from sfsync.errors import DimensionMismatch, EmptyGraph, InvalidParams
from sfsync.graph import Graph, isolated_nodes, max_degree_hub

# attempts to draw a non-loop endpoint pair before giving up on one new edge
_MAX_PAIR_DRAWS = 100


@dataclass(frozen=True)
class RewireRule:
    theta: float = 0.5
    d_low: float = 2
    p_drop: float = 0.3
    # None means ceil(growth_fraction * |E|) per phase
    growth_edges_per_phase: int | None = None
    growth_fraction: float = 0.15

    def validate(self) -> "RewireRule":
        if not (0.0 <= self.p_drop <= 1.0):
            raise InvalidParams(f"p_drop must lie in [0, 1], got {self.p_drop}")
        if not (self.theta >= 0):
            raise InvalidParams(f"theta must be >= 0, got {self.theta}")
        if self.growth_edges_per_phase is not None and self.growth_edges_per_phase < 0:
            raise InvalidParams("growth budget must be non-negative")
        if self.growth_fraction < 0:
            raise InvalidParams("growth_fraction must be non-negative")
        return self

    def growth_budget(self, n_edges: int) -> int:
        if self.growth_edges_per_phase is not None:
            return int(self.growth_edges_per_phase)
        return int(math.ceil(self.growth_fraction * n_edges))


@dataclass
class RewireLog:
    removed_edges: list[tuple[int, int]] = field(default_factory=list)
    added_edges: list[tuple[int, int]] = field(default_factory=list)


def _state_array(states, n):
    values = getattr(states, "values", states)
    x = np.asarray(values, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != n:
        raise DimensionMismatch(f"{x.shape[0]} states for {n} nodes")
    return x


def rewire_phase(graph, states, rule: RewireRule, rng: np.random.Generator):
    """Return ``(new_graph, log)``; the input graph is not modified.

    An edge ``(i, j)`` is a drop candidate when ``min(deg_i, deg_j) <= d_low``
    and ``||x_i - x_j||_inf > theta``; each candidate is removed with
    probability ``p_drop``.  Degrees are taken from the graph as passed in.
    Afterwards ``growth_budget`` edges are added with both endpoints drawn
    proportionally to degree, never as self-loops.
    """
    rule.validate()
    g0 = getattr(graph, "graph", graph)
    x = _state_array(states, g0.n_nodes)
    g = g0.copy()
    log = RewireLog()
    deg = g0.degrees().total
    edges = g0.edge_array()
    if len(edges) and rule.p_drop > 0:
        u, v = edges[:, 0], edges[:, 1]
        low = np.minimum(deg[u], deg[v]) <= rule.d_low
        far = np.abs(x[u] - x[v]).max(axis=1) > rule.theta
        eids = [e for e, _, _ in g0.edges()]
        for k in np.flatnonzero(low & far):
            if rng.random() < rule.p_drop:
                g.remove_edge(eids[k])
                log.removed_edges.append((int(u[k]), int(v[k])))

    budget = rule.growth_budget(g0.n_edges)
    if budget and g.n_nodes >= 2:
        w = g.degrees().total.astype(float)
        total = w.sum()
        if total > 0:
            # weights are fixed for the whole phase, so all pairs are drawn at
            # once and only the self-loop draws are repeated
            cum = np.cumsum(w)
            last = g.n_nodes - 1

            def draw(k):
                idx = np.searchsorted(cum, rng.random((k, 2)) * total, side="right")
                return np.minimum(idx, last)

            pairs = draw(budget)
            keep = pairs[:, 0] != pairs[:, 1]
            for _ in range(_MAX_PAIR_DRAWS - 1):
                redo = np.flatnonzero(~keep)
                if not len(redo):
                    break
                pairs[redo] = draw(len(redo))
                keep[redo] = pairs[redo, 0] != pairs[redo, 1]
            pairs = pairs[keep]
            g.add_edges(pairs[:, 0], pairs[:, 1])
            log.added_edges.extend((int(a), int(b)) for a, b in pairs)
    return g, log


@dataclass
class RepairResult:
    graph: Graph
    count: int
    hub: int | None
    # True when no node had any edge and everything was attached to node 0
    all_isolated: bool = False

    def __iter__(self):
        # unpacks as (graph, count)
        return iter((self.graph, self.count))


def repair_isolated(graph) -> RepairResult:
    """Attach every isolated node to the max-degree hub with one edge.

    The hub is chosen once, before any repair.  If every node is isolated the
    smallest node id serves as hub and ``all_isolated`` is set.
    """
    g0 = getattr(graph, "graph", graph)
    if g0.n_nodes == 0:
        raise EmptyGraph("cannot repair an empty graph")
    if g0.n_nodes < 2:
        raise EmptyGraph("repair needs at least 2 nodes")
    lonely = isolated_nodes(g0)
    if not lonely:
        return RepairResult(g0.copy(), 0, None)
    g = g0.copy()
    all_isolated = len(lonely) == g.n_nodes
    hub = 0 if all_isolated else max_degree_hub(g0)
    count = 0
    for v in lonely:
        if v == hub:
            continue
        g.add_edge(v, hub)
        count += 1
    return RepairResult(g, count, hub, all_isolated)


def write_event_log(records, path) -> Path:
    """Per-phase JSON-lines log: ``{phase, removed_edges, added_edges, repaired_nodes}``."""
    path = Path(path)
    path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in records))
    return path
