import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfsync.centrality import (BRUTE_FORCE_MAX_N, betweenness_centrality, brute_force_betweenness,
                               centrality_table, closeness_centrality, degree_centrality,
                               pagerank_centrality, CentralityTable)
from sfsync.errors import GraphTooLarge, NoConvergence, TooFewNodes
from sfsync.generator import GenParams, grow
from sfsync.graph import Graph, from_edges

from conftest import connected_gnp, cycle_graph, gnp, path_graph, small_graphs, star_graph


def complete(n):
    return from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n_nodes))
    h.add_edges_from((u, v) for _, u, v in g.edges() if u != v)
    return h


# -- hand-computed values ---------------------------------------------------

def test_degree_examples():
    np.testing.assert_allclose(degree_centrality(star_graph(4)), [1, .25, .25, .25, .25])
    np.testing.assert_allclose(degree_centrality(path_graph(3)), [.5, 1, .5])
    np.testing.assert_allclose(degree_centrality(complete(4)), 1.0)


def test_pagerank_examples():
    np.testing.assert_allclose(pagerank_centrality(cycle_graph(3), damping=1), [1 / 3] * 3, atol=1e-9)
    np.testing.assert_allclose(pagerank_centrality(path_graph(3), damping=1), [.25, .5, .25], atol=1e-9)
    np.testing.assert_allclose(pagerank_centrality(star_graph(4), damping=1),
                               [.5, .125, .125, .125, .125], atol=1e-9)


def test_betweenness_examples():
    np.testing.assert_allclose(betweenness_centrality(path_graph(3)), [0, 1, 0])
    np.testing.assert_allclose(betweenness_centrality(complete(4)), 0.0)
    np.testing.assert_allclose(betweenness_centrality(star_graph(4)), [1, 0, 0, 0, 0])


def test_brute_force_examples():
    np.testing.assert_allclose(brute_force_betweenness(path_graph(3)), [0, 1, 0])
    np.testing.assert_allclose(brute_force_betweenness(from_edges(4, [(0, 1), (2, 3)])), 0.0)
    with pytest.raises(GraphTooLarge):
        brute_force_betweenness(path_graph(BRUTE_FORCE_MAX_N + 1))


def test_closeness_examples():
    np.testing.assert_allclose(closeness_centrality(path_graph(3)), [2 / 3, 1, 2 / 3])
    np.testing.assert_allclose(closeness_centrality(star_graph(4)), [1] + [4 / 7] * 4)
    c = closeness_centrality(from_edges(4, [(0, 1), (1, 2)]))
    assert c[3] == 0.0
    # component of size 3 inside N = 4: ((c-1)/(N-1)) * ((c-1)/sum d) for the middle node
    assert c[1] == pytest.approx((2 / 3) * (2 / 2))


def test_table_examples():
    t = centrality_table(path_graph(3), damping=1.0)
    np.testing.assert_allclose(t.degree, [.5, 1, .5])
    np.testing.assert_allclose(t.betweenness, [0, 1, 0])
    np.testing.assert_allclose(t.closeness, [2 / 3, 1, 2 / 3])
    np.testing.assert_allclose(t.pagerank, [.25, .5, .25], atol=1e-9)
    k4 = centrality_table(complete(4))
    np.testing.assert_allclose(k4.as_matrix(), np.tile([1, .25, 0, 1], (4, 1)), atol=1e-12)


def test_table_is_pure():
    g = grow(GenParams(n_target=120, seed=9)).final.freeze()
    np.testing.assert_array_equal(centrality_table(g).as_matrix(), centrality_table(g).as_matrix())


def test_too_few_nodes():
    with pytest.raises(TooFewNodes):
        degree_centrality(Graph(1))
    with pytest.raises(TooFewNodes):
        betweenness_centrality(Graph(2))
    with pytest.raises(TooFewNodes):
        closeness_centrality(Graph(1))
    with pytest.raises(TooFewNodes):
        pagerank_centrality(Graph(0))


# -- pagerank details ---------------------------------------------------------

def test_pagerank_bipartite_damping_one_converges():
    # plain power iteration oscillates on a bipartite graph; the lazy update does not
    pr, info = pagerank_centrality(path_graph(4), damping=1.0, return_info=True)
    np.testing.assert_allclose(pr, [1 / 6, 2 / 6, 2 / 6, 1 / 6], atol=1e-9)
    assert info.averaged


def test_pagerank_isolated_nodes_flagged():
    g = from_edges(4, [(0, 1), (1, 2)])
    pr, info = pagerank_centrality(g, damping=1.0, return_info=True)
    assert info.isolated_redistributed
    assert pr.sum() == pytest.approx(1.0)
    assert pr[3] > 0


def test_pagerank_no_convergence_reports_residual():
    with pytest.raises(NoConvergence) as exc:
        pagerank_centrality(path_graph(6), damping=1.0, tol=1e-15, max_iter=3)
    assert exc.value.iterations == 3 and exc.value.residual > 0


def test_pagerank_argument_checks():
    with pytest.raises(ValueError):
        pagerank_centrality(path_graph(3), damping=0.0)
    with pytest.raises(ValueError):
        pagerank_centrality(path_graph(3), tol=0.0)


# -- cross-checks -------------------------------------------------------------

def test_brandes_matches_brute_force_random():
    rng = np.random.default_rng(1)
    for _ in range(100):
        g = gnp(int(rng.integers(3, 10)), float(rng.choice([0.2, 0.5, 0.8])), rng)
        np.testing.assert_allclose(betweenness_centrality(g), brute_force_betweenness(g),
                                   rtol=0, atol=1e-9)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_against_networkx(seed):
    g = grow(GenParams(n_target=300, seed=seed)).final.copy()
    # drop a few edges so that some nodes end up isolated
    for e in [e for e, _, _ in g.edges()][::7]:
        g.remove_edge(e)
    h = to_nx(g)
    t = centrality_table(g)
    ref = lambda d: np.array([d[i] for i in range(g.n_nodes)])
    np.testing.assert_allclose(t.degree, ref(nx.degree_centrality(h)), atol=1e-12)
    np.testing.assert_allclose(t.betweenness, ref(nx.betweenness_centrality(h)), atol=1e-10)
    np.testing.assert_allclose(t.closeness, ref(nx.closeness_centrality(h)), atol=1e-12)
    np.testing.assert_allclose(t.pagerank, ref(nx.pagerank(h, alpha=0.85, tol=1e-12, max_iter=10_000)), atol=1e-8)


def test_pagerank_damping_one_equals_degree_share():
    rng = np.random.default_rng(3)
    for _ in range(20):
        g = connected_gnp(int(rng.integers(3, 30)), 0.3, rng)
        d = g.projected_degrees()
        np.testing.assert_allclose(pagerank_centrality(g, damping=1.0), d / d.sum(), atol=1e-8)


# -- properties -----------------------------------------------------------------

@given(small_graphs(), st.randoms(use_true_random=False))
@settings(max_examples=50, deadline=None)
def test_relabelling_permutes_every_measure(g, rnd):
    perm = list(range(g.n_nodes))
    rnd.shuffle(perm)
    h = from_edges(g.n_nodes, [(perm[u], perm[v]) for _, u, v in g.edges()])
    a, b = centrality_table(g).as_matrix(), centrality_table(h).as_matrix()
    np.testing.assert_allclose(b[perm], a, atol=1e-9)


@given(small_graphs())
@settings(max_examples=60, deadline=None)
def test_table_ranges(g):
    t = centrality_table(g)
    assert ((0 <= t.degree) & (t.degree <= 1)).all()
    assert ((-1e-12 <= t.betweenness) & (t.betweenness <= 1 + 1e-12)).all()
    assert (t.pagerank >= 0).all() and abs(t.pagerank.sum() - 1) < 1e-8
    assert ((0 <= t.closeness) & (t.closeness <= 1 + 1e-12)).all()


def test_csv_round_trip(tmp_path):
    t = centrality_table(grow(GenParams(n_target=50, seed=1)).final)
    path = tmp_path / "c.csv"
    t.to_csv(path)
    assert path.read_text().splitlines()[0] == "node_id,degree_c,pagerank_c,betweenness_c,closeness_c"
    back = CentralityTable.from_csv(path)
    np.testing.assert_array_equal(back.as_matrix(), t.as_matrix())
