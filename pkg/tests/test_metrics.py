import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete, cycle, path, star, triangle_with_pendant
from synmorph.graph import from_edges, giant_component
from synmorph.metrics import (
    METRICS, ConvergenceError, clique_metrics, clustering_metrics, core_decomposition,
    degree_and_components, eigenvector_centrality, maximal_cliques, pagerank, path_centralities,
    primary_matrix, read_metric_table, spectral_centralities, structural_holes,
)

import oracles

ITERATIVE = {"eigenvector_centrality", "pagerank"}


def test_k4_full_table():
    t = primary_matrix(complete(4))
    expected = dict(degree=3, eigenvector_centrality=0.5, betweenness=0, closeness=1, harmonic=3,
                    pagerank=0.25, core_number=3, onion_layer=1, effective_size=1,
                    node_clique_number=4, number_of_cliques=1, clustering=1, square_clustering=1,
                    constraint=3 * (1 / 3 + 2 / 9) ** 2, component_size=4)
    for name, v in expected.items():
        np.testing.assert_allclose(t[name], v, atol=1e-12, err_msg=name)


def test_path3():
    g = path(3)
    deg, comp = degree_and_components(g)
    assert deg.tolist() == [1, 2, 1] and comp.tolist() == [3, 3, 3]
    btw, clo, har = path_centralities(g)
    assert btw.tolist() == [0.0, 1.0, 0.0]
    assert clo[0] == pytest.approx(2 / 3) and har[1] == 2.0
    _, pr = spectral_centralities(g)
    np.testing.assert_allclose(pr, [19 / 74, 18 / 37, 19 / 74], atol=1e-9)
    # frozen from the 3x3 linear-system oracle
    np.testing.assert_allclose(pr, [0.25675675675675674, 0.48648648648648646, 0.25675675675675674], atol=1e-9)


def test_path4():
    g = path(4)
    btw, _, _ = path_centralities(g)
    assert btw[1] == pytest.approx(2 / 3)
    core, onion = core_decomposition(g)
    assert core.tolist() == [1, 1, 1, 1]
    assert onion.tolist() == [1, 2, 2, 1]


def test_triangle():
    g = complete(3)
    eig, pr = spectral_centralities(g)
    np.testing.assert_allclose(eig, 1 / math.sqrt(3), atol=1e-9)
    np.testing.assert_allclose(pr, 1 / 3, atol=1e-9)
    clu, _ = clustering_metrics(g)
    assert clu.tolist() == [1.0, 1.0, 1.0]
    eff, con = structural_holes(g)
    np.testing.assert_allclose(eff, 1.0)
    np.testing.assert_allclose(con, 1.125)


def test_triangle_with_pendant():
    g = triangle_with_pendant()
    core, onion = core_decomposition(g)
    assert core.tolist() == [2, 2, 2, 1]
    assert onion.tolist() == [2, 2, 2, 1]
    ncl, nnum = clique_metrics(g)
    assert (ncl[0], nnum[0]) == (3, 2)
    assert (ncl[3], nnum[3]) == (2, 1)


@pytest.mark.parametrize("k", [1, 3, 6])
def test_star(k):
    g = star(k)
    clu, _ = clustering_metrics(g)
    assert clu[0] == 0.0
    eff, con = structural_holes(g)
    assert eff[0] == pytest.approx(k) and con[0] == pytest.approx(1 / k)
    assert eff[1] == pytest.approx(1.0) and con[1] == pytest.approx(1.0)


def test_four_cycle_square_clustering():
    _, sq = clustering_metrics(cycle(4))
    assert sq.tolist() == [1.0, 1.0, 1.0, 1.0]


def test_small_graphs_betweenness_zero():
    btw, _, _ = path_centralities(path(2))
    assert btw.tolist() == [0.0, 0.0]


def test_isolated_node_structural_holes_error():
    with pytest.raises(ValueError, match="degree-0 node"):
        structural_holes(from_edges(3, [(0, 1)]))


def test_convergence_error_carries_residual():
    with pytest.raises(ConvergenceError) as exc:
        pagerank(giant_component(from_edges(30, [(i, i + 1) for i in range(29)])), tol=0.0, max_iter=3)
    assert exc.value.iterations == 3 and exc.value.residual > 0


def test_oracle_equivalence(random_graphs):
    for g in random_graphs:
        got = primary_matrix(g).values
        want = oracles.primary(g.n_nodes, g.edges)
        for c, name in enumerate(METRICS):
            tol = 1e-6 if name in ITERATIVE else 1e-9
            np.testing.assert_allclose(got[:, c], want[:, c], rtol=0, atol=tol, err_msg=name)


def test_eigenvector_residual(random_graphs):
    for g in random_graphs:
        x = eigenvector_centrality(g)
        a = g.adjacency()
        lam = x @ a @ x
        assert np.linalg.norm(a @ x - lam * x) <= 1e-8
        assert abs(np.linalg.norm(x) - 1) < 1e-12


def test_maximal_cliques_are_maximal_and_complete(random_graphs):
    for g in random_graphs[:8]:
        masks = maximal_cliques(g)
        got = sorted(sorted(i for i in range(g.n_nodes) if m >> i & 1) for m in masks)
        want = sorted(sorted(c) for c in oracles.maximal_cliques(oracles.adjacency(g.n_nodes, g.edges)))
        assert got == want


def test_invariants(random_graphs):
    for g in random_graphs:
        t = primary_matrix(g)
        n = g.n_nodes
        for name in ("clustering", "square_clustering", "betweenness", "closeness"):
            assert ((t[name] >= 0) & (t[name] <= 1 + 1e-12)).all(), name
        assert ((t["harmonic"] >= 0) & (t["harmonic"] <= n - 1)).all()
        assert (t["pagerank"] > 0).all() and abs(t["pagerank"].sum() - 1) <= 1e-9
        assert (t["effective_size"] <= t["degree"] + 1e-12).all()
        assert (t["core_number"] <= t["degree"]).all()
        assert (t["node_clique_number"] >= 2).all() and (t["number_of_cliques"] >= 1).all()
        assert (t["constraint"] > 0).all()
        assert (t["component_size"] == n).all()


def test_onion_consistency(random_graphs):
    for g in random_graphs:
        core, onion = core_decomposition(g)
        # nodes sharing a layer share a core number, and cores never decrease with layer
        by_layer = {}
        for c, l in zip(core, onion):
            by_layer.setdefault(l, set()).add(c)
        assert all(len(s) == 1 for s in by_layer.values())
        layers = sorted(by_layer)
        assert layers == list(range(1, len(layers) + 1))
        ks = [next(iter(by_layer[l])) for l in layers]
        assert ks == sorted(ks)


def test_csv_round_trip(random_graphs):
    t = primary_matrix(random_graphs[0])
    buf = io.StringIO()
    t.write_csv(buf)
    assert buf.getvalue().splitlines()[0] == "surface,upos," + ",".join(METRICS)
    back = read_metric_table(io.StringIO(buf.getvalue()))
    assert back.keys == t.keys and np.array_equal(back.values, t.values)


def test_deterministic(random_graphs):
    g = random_graphs[3]
    assert np.array_equal(primary_matrix(g).values, primary_matrix(g).values)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 14).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), min_size=n))))
def test_property_oracle_equivalence(data):
    n, edges = data
    g = giant_component(from_edges(n, edges))
    if g.n_nodes < 2:
        return
    got = primary_matrix(g).values
    want = oracles.primary(g.n_nodes, g.edges)
    skip = {"eigenvector_centrality"}  # bipartite graphs have a signed +-lambda pair; checked via residual above
    for c, name in enumerate(METRICS):
        if name in skip:
            continue
        np.testing.assert_allclose(got[:, c], want[:, c], atol=1e-6 if name in ITERATIVE else 1e-9, err_msg=name)


def test_networkx_cross_check(random_graphs):
    nx = pytest.importorskip("networkx")
    for g in random_graphs[:10]:
        G = nx.Graph()
        G.add_nodes_from(range(g.n_nodes))
        G.add_edges_from(g.edges)
        t = primary_matrix(g)
        ref = {
            "betweenness": nx.betweenness_centrality(G),
            "closeness": nx.closeness_centrality(G),
            "harmonic": nx.harmonic_centrality(G),
            "pagerank": nx.pagerank(G, tol=1e-13, max_iter=10_000),
            "core_number": nx.core_number(G),
            "onion_layer": nx.onion_layers(G),
            "effective_size": nx.effective_size(G),
            "constraint": nx.constraint(G),
            "clustering": nx.clustering(G),
            "eigenvector_centrality": nx.eigenvector_centrality_numpy(G),
        }
        for name, d in ref.items():
            want = np.array([d[i] for i in range(g.n_nodes)], dtype=float)
            np.testing.assert_allclose(t[name], want, atol=1e-6, err_msg=name)
