"""Directed scale-free growth (Bollobas-Borgs-Chayes-Riordan model).

Each growth step draws one of three events:

* ``alpha``: a new node ``v`` and an edge ``v -> w``, ``w`` chosen with
  probability proportional to ``in_degree(w) + delta_in``;
* ``beta``: an edge ``v -> w`` between existing nodes, ``v`` by
  ``out_degree + delta_out`` and ``w`` by ``in_degree + delta_in``;
* ``gamma``: a new node ``w`` and an edge ``v -> w``, ``v`` by
  ``out_degree + delta_out``.

Growth starts from the directed 3-cycle ``0 -> 1 -> 2 -> 0`` so that both
degree kinds are nonzero everywhere even with zero smoothing offsets.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from sfsync.errors import InvalidParams, ZeroTotalWeight
from sfsync.graph import Graph, PhaseSnapshot, write_edgelist

EVENT_KINDS = ("alpha", "beta", "gamma")


@dataclass(frozen=True)
class GenParams:
    alpha: float = 0.41
    beta: float = 0.54
    gamma: float = 0.05
    delta_in: float = 0.2
    delta_out: float = 0.0
    n_target: int = 1000
    seed: int = 0
    snapshot_every: int = 100

    def validate(self) -> "GenParams":
        probs = (self.alpha, self.beta, self.gamma)
        if any(p < 0 or not math.isfinite(p) for p in probs):
            raise InvalidParams(f"event probabilities must be non-negative, got {probs}")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise InvalidParams(f"alpha + beta + gamma must equal 1, got {sum(probs)!r}")
        if self.alpha + self.gamma <= 0:
            raise InvalidParams("alpha + gamma must be positive or the graph never grows")
        if self.delta_in < 0 or self.delta_out < 0:
            raise InvalidParams("smoothing offsets must be non-negative")
        if self.n_target < 3:
            raise InvalidParams("n_target must be at least 3")
        if self.snapshot_every < 1:
            raise InvalidParams("snapshot_every must be at least 1")
        if not (0 <= self.seed < 2**64):
            raise InvalidParams("seed must be an unsigned 64-bit integer")
        return self

    def expected_steps(self) -> float:
        """Expected number of growth steps to go from the seed to ``n_target``."""
        return (self.n_target - 3) / (self.alpha + self.gamma)


@dataclass(frozen=True)
class GrowthEvent:
    step: int
    kind: str
    u: int
    v: int


@dataclass
class GrowthTrace:
    params: GenParams
    snapshots: list[PhaseSnapshot] = field(default_factory=list)
    events: list[GrowthEvent] = field(default_factory=list)

    @property
    def final(self) -> Graph:
        return self.snapshots[-1].graph

    def events_between(self, step_lo: int, step_hi: int) -> list[GrowthEvent]:
        """Events with ``step_lo < step <= step_hi``."""
        return [e for e in self.events if step_lo < e.step <= step_hi]


def preferential_pick(weights, rng: np.random.Generator) -> int:
    """Index drawn with probability ``weights[i] / sum(weights)``."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or len(w) == 0:
        raise ZeroTotalWeight("weights must be a non-empty 1-D sequence")
    if (w < 0).any() or not np.isfinite(w).all():
        raise ValueError("weights must be finite and non-negative")
    cum = np.cumsum(w)
    total = cum[-1]
    if total <= 0:
        raise ZeroTotalWeight("sum of weights is zero")
    idx = int(np.searchsorted(cum, rng.random() * total, side="right"))
    return min(idx, len(w) - 1)


class _Sampler:
    """O(1) degree-plus-offset sampling.

    Picking ``w`` with probability ``(d(w) + delta) / (E + delta * n)`` is a
    two-way mixture: a uniformly random edge endpoint with weight ``E`` or a
    uniformly random node with weight ``delta * n``.  One uniform draw covers
    both branches.
    """

    def __init__(self, endpoints: list[int], delta: float):
        self.endpoints = endpoints
        self.delta = delta

    def pick(self, rng, n_nodes):
        m = len(self.endpoints)
        r = rng.random() * (m + self.delta * n_nodes)
        if r < m:
            return self.endpoints[min(int(r), m - 1)]
        return min(int((r - m) / self.delta), n_nodes - 1)


def grow(params: GenParams) -> GrowthTrace:
    """Grow a directed scale-free network, recording phase snapshots."""
    params.validate()
    rng = np.random.default_rng(params.seed)
    g = Graph(3)
    heads: list[int] = []
    tails: list[int] = []
    for u, v in ((0, 1), (1, 2), (2, 0)):
        g.add_edge(u, v)
        tails.append(u)
        heads.append(v)
    by_in = _Sampler(heads, params.delta_in)
    by_out = _Sampler(tails, params.delta_out)
    a_cut = params.alpha
    b_cut = params.alpha + params.beta

    trace = GrowthTrace(params)
    step = 0
    while g.n_nodes < params.n_target:
        step += 1
        r = rng.random()
        n = g.n_nodes
        if r < a_cut:
            kind = "alpha"
            w = by_in.pick(rng, n)
            v = g.add_node()
        elif r < b_cut:
            kind = "beta"
            v = by_out.pick(rng, n)
            w = by_in.pick(rng, n)
        else:
            kind = "gamma"
            v = by_out.pick(rng, n)
            w = g.add_node()
        g.add_edge(v, w)
        tails.append(v)
        heads.append(w)
        trace.events.append(GrowthEvent(step, kind, v, w))
        if step % params.snapshot_every == 0 or g.n_nodes >= params.n_target:
            trace.snapshots.append(
                PhaseSnapshot(g.copy().freeze(), phase=len(trace.snapshots), step=step))
    return trace


def export_trace(trace: GrowthTrace, outdir) -> Path:
    """Write one edge-list per snapshot plus ``manifest.jsonl``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    params = asdict(trace.params)
    lines = []
    for snap in trace.snapshots:
        name = f"snapshot_{snap.phase:04d}.edgelist"
        write_edgelist(snap.graph, outdir / name,
                       comments=[f"seed: {trace.params.seed}", f"step: {snap.step}"])
        lines.append(json.dumps({
            "snapshot": snap.phase, "file": name, "step": snap.step,
            "n_nodes": snap.graph.n_nodes, "n_edges": snap.graph.n_edges,
            "seed": trace.params.seed, "params": params,
        }, sort_keys=True))
    manifest = outdir / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest
