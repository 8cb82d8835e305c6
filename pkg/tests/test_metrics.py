import math
import random
from collections import Counter

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from airnet.errors import DegenerateError, InsufficientDataError
from airnet.graph import GraphSnapshot, degree_sequences
from airnet.metrics import (
    betweenness,
    clustering,
    connected_components,
    degree_distribution,
    in_out_correlation,
    nearest_neighbor_degree,
    node_knn,
    node_metrics,
    reciprocity,
    shortest_path_stats,
)

from conftest import CYCLE3, P1, PATH3, STAR4, TRIANGLE, random_digraph, snap, sym


def er_graph(n, p, seed):
    return random_digraph(n, p, random.Random(seed))


# --- degree distribution -----------------------------------------------------


def test_degree_distribution_small():
    assert degree_distribution(TRIANGLE).entries == ((2, 1.0),)
    assert degree_distribution(STAR4).entries == ((1, 0.75), (3, 0.25))


def test_degree_distribution_matches_frequency_count():
    g = er_graph(100, 0.1, 5)
    table = degree_distribution(g)
    adj = oracles.undirected_matrix(g.sorted_nodes, g.arcs)
    freq = Counter(adj.sum(axis=1).tolist())
    assert dict(table.entries) == pytest.approx({k: c / 100 for k, c in freq.items()}, abs=1e-12)
    assert math.fsum(table.p) == pytest.approx(1.0, abs=1e-9)


def test_in_and_out_degree_distributions():
    g = snap([("A", "B"), ("A", "C"), ("B", "C")])
    assert degree_distribution(g, degree="out").entries == ((0, 1 / 3), (1, 1 / 3), (2, 1 / 3))
    assert degree_distribution(g, degree="in").entries == ((0, 1 / 3), (1, 1 / 3), (2, 1 / 3))


def test_log_binned_density_integrates_to_one():
    t = degree_distribution(er_graph(200, 0.05, 1), 1.5)
    assert t.binning == "log" and t.base == 1.5
    assert math.fsum(p * w for p, w in zip(t.p, t.widths)) == pytest.approx(1.0, abs=1e-9)


# --- in/out correlation ------------------------------------------------------


def test_in_out_symmetric_graph_is_identity():
    fit = in_out_correlation(STAR4)
    assert (fit.slope, fit.intercept, fit.pearson_r) == pytest.approx((1, 0, 1), abs=1e-12)


def test_in_out_cycle_is_degenerate():
    with pytest.raises(DegenerateError):
        in_out_correlation(CYCLE3)


def test_in_out_matches_ols_oracle():
    g = er_graph(50, 0.15, 3)
    pts = [(r.k_in, r.k_out) for r in degree_sequences(g) if r.k_in + r.k_out > 0]
    slope, intercept, r = oracles.ols(pts)
    fit = in_out_correlation(g)
    assert fit.slope == pytest.approx(slope, abs=1e-9)
    assert fit.intercept == pytest.approx(intercept, abs=1e-9)
    assert fit.pearson_r == pytest.approx(r, abs=1e-9)


# --- knn / clustering --------------------------------------------------------


def test_knn_small_graphs():
    assert dict(nearest_neighbor_degree(STAR4)) == {1: 3.0, 3: 1.0}
    assert dict(nearest_neighbor_degree(TRIANGLE)) == {2: 2.0}


def test_knn_excludes_isolated_and_needs_edges():
    g = sym([("A", "B")], nodes=["Z"])
    assert "Z" not in node_knn(g)
    with pytest.raises(InsufficientDataError):
        nearest_neighbor_degree(snap([], nodes=["A"]))


def test_knn_matches_enumeration_oracle():
    g = er_graph(30, 0.2, 11)
    adj = oracles.undirected_matrix(g.sorted_nodes, g.arcs)
    expected = oracles.knn(adj)
    got = node_knn(g)
    for i, n in enumerate(g.sorted_nodes):
        if expected[i] is None:
            assert n not in got
        else:
            assert got[n] == pytest.approx(expected[i], abs=1e-12)


def test_clustering_small_graphs():
    tri = clustering(TRIANGLE)
    assert tri.mean == 1 and set(tri.per_node.values()) == {1.0}
    star = clustering(STAR4)
    assert star.mean == 0 and set(star.per_node.values()) == {0.0}


def test_clustering_conventions_differ_only_on_low_degree():
    # triangle with a pendant: pendant has k = 1
    g = sym([("A", "B"), ("B", "C"), ("A", "C"), ("C", "D")])
    zero, excl = clustering(g, "zero"), clustering(g, "exclude")
    assert zero.per_node["C"] == pytest.approx(1 / 3)
    assert zero.mean == pytest.approx((1 + 1 + 1 / 3 + 0) / 4)
    assert excl.mean == pytest.approx((1 + 1 + 1 / 3) / 3)
    assert dict(zero.by_degree) == pytest.approx({1: 0.0, 2: 1.0, 3: 1 / 3})


# --- paths ---------------------------------------------------------------------


def test_path_stats_star_and_path():
    s = shortest_path_stats(STAR4)
    assert s.histogram == ((1, 3, 50.0), (2, 3, 50.0))
    assert (s.d, s.D) == (1.5, 2)
    p = shortest_path_stats(PATH3)
    assert p.d == pytest.approx(4 / 3) and p.D == 2


def test_path_stats_use_largest_component():
    g = sym([("A", "B"), ("B", "C"), ("X", "Y")])
    s = shortest_path_stats(g)
    assert s.component_sizes == (3, 2)
    assert s.pair_count == 3 and s.D == 2


def test_published_path_counts_are_consistent():
    counts = {1: 902, 2: 5561, 3: 2853, 4: 137}
    total = sum(counts.values())
    assert total == 9453 == 138 * 137 // 2
    pct = {l: round(100 * c / total, 2) for l, c in counts.items()}
    assert pct == {1: 9.54, 2: 58.83, 3: 30.18, 4: 1.45}
    # 902 length-one pairs are the edges: mean degree 2 * 902 / 138
    assert round(2 * 902 / 138, 2) == 13.07


def test_path_stats_against_networkx():
    g = er_graph(60, 0.08, 9)
    G = nx.Graph(list(g.undirected.edges))
    G.add_nodes_from(g.nodes)
    giant = G.subgraph(max(nx.connected_components(G), key=len))
    s = shortest_path_stats(g)
    assert s.d == pytest.approx(nx.average_shortest_path_length(giant), abs=1e-12)
    assert s.D == nx.diameter(giant)


# --- betweenness --------------------------------------------------------------


def test_betweenness_path_and_star():
    assert betweenness(PATH3) == {"A": 0.0, "B": 1.0, "C": 0.0}
    assert betweenness(STAR4) == {"H": 3.0, "L1": 0.0, "L2": 0.0, "L3": 0.0}


def test_betweenness_fractional_on_square():
    g = sym([("A", "B"), ("B", "C"), ("C", "D"), ("D", "A")])
    assert betweenness(g) == pytest.approx({n: 0.5 for n in "ABCD"})


def test_betweenness_normalized_scale():
    raw = betweenness(STAR4)
    norm = betweenness(STAR4, normalized=True)
    assert norm["H"] == pytest.approx(raw["H"] * 2 / (3 * 2))


def test_betweenness_against_networkx():
    g = er_graph(40, 0.1, 21)
    G = nx.Graph(list(g.undirected.edges))
    G.add_nodes_from(g.nodes)
    ref = nx.betweenness_centrality(G, normalized=False)
    got = betweenness(g)
    assert got == pytest.approx(ref, abs=1e-9)


def test_betweenness_tree_identity():
    rng = random.Random(4)
    edges = [(f"T{i}", f"T{rng.randrange(i)}") for i in range(1, 25)]
    g = sym(edges)
    hist = shortest_path_stats(g).histogram
    assert math.fsum(betweenness(g).values()) == pytest.approx(
        sum((l - 1) * c for l, c, _ in hist), abs=1e-9
    )


def test_worker_counts_agree():
    g = er_graph(80, 0.06, 13)
    assert betweenness(g, workers=1) == betweenness(g, workers=3)
    assert shortest_path_stats(g, workers=1) == shortest_path_stats(g, workers=3)


# --- reciprocity --------------------------------------------------------------


def test_reciprocity_cycle_hand_values():
    r = reciprocity(CYCLE3)
    assert r.a_bar == 0.5
    assert r.r == pytest.approx(-1.0, abs=1e-12)
    ratio, num, den, _ = oracles.reciprocity(
        oracles.directed_matrix(CYCLE3.sorted_nodes, CYCLE3.arcs))
    assert (num, den) == pytest.approx((-1.5, 1.5))


def test_reciprocity_symmetric_is_one():
    assert reciprocity(STAR4).r == pytest.approx(1.0, abs=1e-12)


def test_reciprocity_uniform_adjacency_is_degenerate():
    complete = sym([(u, v) for u in "ABCD" for v in "ABCD" if u < v])
    with pytest.raises(DegenerateError):
        reciprocity(complete)
    with pytest.raises(DegenerateError):
        reciprocity(snap([], nodes=["A", "B"]))


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 9), st.floats(0.05, 0.95), st.integers(0, 2**32 - 1))
def test_reciprocity_bounded_and_matches_double_sum(n, p, seed):
    g = er_graph(n, p, seed)
    if len(g.arcs) in (0, n * (n - 1)):
        return
    r = reciprocity(g).r
    assert -1 - 1e-12 <= r <= 1 + 1e-12
    expected = oracles.reciprocity(oracles.directed_matrix(g.sorted_nodes, g.arcs))[0]
    assert r == pytest.approx(expected, abs=1e-9)


# --- invariance ---------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 12), st.floats(0.1, 0.6), st.integers(0, 2**32 - 1), st.randoms())
def test_label_permutation_invariance(n, p, seed, shuffler):
    g = er_graph(n, p, seed)
    names = sorted(g.nodes)
    perm = list(names)
    shuffler.shuffle(perm)
    h = g.relabel({a: f"Q{b}" for a, b in zip(names, perm)})
    assert degree_distribution(g) == degree_distribution(h)
    sg, sh = shortest_path_stats(g), shortest_path_stats(h)
    assert (sg.d, sg.D, sg.histogram) == (sh.d, sh.D, sh.histogram)
    assert clustering(g).mean == pytest.approx(clustering(h).mean, abs=1e-12)
    if 0 < len(g.arcs) < n * (n - 1):
        assert reciprocity(g).r == pytest.approx(reciprocity(h).r, abs=1e-12)
    assert sorted(betweenness(g).values()) == pytest.approx(sorted(betweenness(h).values()))


def test_node_metrics_rows():
    rows = {m.node: m for m in node_metrics(STAR4)}
    h = rows["H"]
    assert (h.k, h.k_in, h.k_out, h.c, h.b, h.knn) == (3, 3, 3, 0.0, 3.0, 1.0)
    for m in rows.values():
        assert 0 <= m.c <= 1 and m.b >= 0


def test_components_order_is_deterministic():
    g = sym([("X", "Y"), ("A", "B")], nodes=["M"])
    assert connected_components(g) == [["A", "B"], ["X", "Y"], ["M"]]
