import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfsync.errors import DimensionMismatch, EmptyGraph, InvalidParams
from sfsync.evolution import RewireRule, repair_isolated, rewire_phase, write_event_log
from sfsync.generator import GenParams, grow
from sfsync.graph import Graph, from_edges, isolated_nodes

from conftest import path_graph, small_graphs, star_graph

NO_GROWTH = dict(growth_edges_per_phase=0)


def spread_states(n):
    return np.arange(n, dtype=float)  # all distinct, neighbours differ by >= 1


def test_rule_validation():
    for kw in (dict(p_drop=1.5), dict(p_drop=-0.1), dict(theta=-1), dict(growth_edges_per_phase=-2),
               dict(growth_fraction=-0.5)):
        with pytest.raises(InvalidParams):
            RewireRule(**kw).validate()
    assert RewireRule(growth_fraction=0.1).growth_budget(25) == 3
    assert RewireRule(growth_edges_per_phase=7).growth_budget(1000) == 7


def test_zero_drop_probability_keeps_graph(rng):
    g = grow(GenParams(n_target=100, seed=1)).final
    new, log = rewire_phase(g, spread_states(100), RewireRule(p_drop=0.0, **NO_GROWTH), rng)
    assert new == g and not log.removed_edges and not log.added_edges


def test_infinite_threshold_keeps_graph(rng):
    g = grow(GenParams(n_target=100, seed=1)).final
    new, _ = rewire_phase(g, spread_states(100), RewireRule(theta=np.inf, p_drop=1.0, **NO_GROWTH), rng)
    assert new == g


def test_universal_rule_removes_everything(rng):
    g = grow(GenParams(n_target=60, seed=2)).final
    rule = RewireRule(theta=0.0, d_low=np.inf, p_drop=1.0, **NO_GROWTH)
    new, log = rewire_phase(g, spread_states(60), rule, rng)
    # self-loops have zero state difference and stay; every other edge goes
    assert new.n_edges == g.n_self_loops
    assert len(log.removed_edges) == g.n_edges - g.n_self_loops


def test_universal_rule_on_loop_free_graph(rng):
    g = path_graph(5)
    rule = RewireRule(theta=0.0, d_low=np.inf, p_drop=1.0, **NO_GROWTH)
    new, _ = rewire_phase(g, spread_states(5), rule, rng)
    assert isolated_nodes(new) == [0, 1, 2, 3, 4]


def test_degree_gate(rng):
    # only the star's leaves have degree <= 1, so with d_low = 0 nothing qualifies
    g = star_graph(4)
    rule = RewireRule(theta=0.0, d_low=0, p_drop=1.0, **NO_GROWTH)
    assert rewire_phase(g, spread_states(5), rule, rng)[0] == g
    rule = RewireRule(theta=0.0, d_low=1, p_drop=1.0, **NO_GROWTH)
    assert rewire_phase(g, spread_states(5), rule, rng)[0].n_edges == 0


def test_input_graph_untouched(rng):
    g = grow(GenParams(n_target=80, seed=4)).final.copy()
    before = g.edge_array().copy()
    rewire_phase(g, spread_states(80), RewireRule(theta=0, p_drop=1.0), rng)
    np.testing.assert_array_equal(g.edge_array(), before)


def test_growth_edges_are_preferential_and_loop_free():
    g = star_graph(30)
    rule = RewireRule(p_drop=0.0, growth_edges_per_phase=2000)
    new, log = rewire_phase(g, np.zeros(31), rule, np.random.default_rng(0))
    assert len(log.added_edges) == 2000
    assert all(a != b for a, b in log.added_edges)
    # centre weight 30 of 60: P(centre is an endpoint | no self-loop)
    # = 0.5 / (1 - 0.25 - 30 / 60**2) = 0.674
    share = np.mean([0 in e for e in log.added_edges])
    assert share == pytest.approx(0.5 / (1 - 0.25 - 30 / 3600), abs=0.03)


def test_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        rewire_phase(path_graph(3), np.zeros(4), RewireRule(), rng)


@given(small_graphs(), st.integers(0, 2**32), st.floats(0, 1), st.integers(0, 10))
@settings(max_examples=60, deadline=None)
def test_node_set_and_degree_accounting(g, seed, p_drop, budget):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, g.n_nodes)
    rule = RewireRule(theta=0.3, d_low=3, p_drop=p_drop, growth_edges_per_phase=budget)
    new, log = rewire_phase(g, x, rule, rng)
    assert new.n_nodes == g.n_nodes
    delta = new.degrees().total.sum() - g.degrees().total.sum()
    assert delta == 2 * (len(log.added_edges) - len(log.removed_edges))


# -- repair --------------------------------------------------------------------

def test_repair_p2_plus_lone_node():
    g = from_edges(3, [(0, 1)])
    res = repair_isolated(g)
    assert res.count == 1 and res.hub == 0
    assert res.graph.degree(2) == 1 and isolated_nodes(res.graph) == []


def test_repair_nothing_to_do():
    g = path_graph(4)
    new, count = repair_isolated(g)
    assert count == 0 and new == g


def test_repair_star_plus_two():
    g = star_graph(4)
    g.add_nodes(2)
    res = repair_isolated(g)
    assert res.hub == 0 and res.count == 2
    assert res.graph.degree(0) == 6
    assert res.graph.degree(5) == res.graph.degree(6) == 1


def test_repair_all_isolated():
    res = repair_isolated(Graph(4))
    assert res.all_isolated and res.hub == 0 and res.count == 3
    assert isolated_nodes(res.graph) == []


def test_repair_empty():
    with pytest.raises(EmptyGraph):
        repair_isolated(Graph())
    with pytest.raises(EmptyGraph):
        repair_isolated(Graph(1))


@given(small_graphs(min_nodes=2), st.integers(0, 4))
@settings(max_examples=80, deadline=None)
def test_repair_properties(g, extra):
    g = g.copy()
    g.add_nodes(extra)
    lonely = isolated_nodes(g)
    res = repair_isolated(g)
    assert isolated_nodes(res.graph) == []
    for v in lonely:
        if v != res.hub:
            assert res.graph.degree(v) == 1
    again = repair_isolated(res.graph)
    assert again.count == 0 and again.graph == res.graph


def test_event_log(tmp_path):
    path = write_event_log([{"phase": 0, "removed_edges": [[1, 2]], "added_edges": [],
                             "repaired_nodes": [2]}], tmp_path / "events.jsonl")
    rec = json.loads(path.read_text())
    assert rec["repaired_nodes"] == [2]
