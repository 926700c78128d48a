import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from socioinfo.graph import DirectedGraph, EgoNetwork, k_core_reduce, undirected_projection
from socioinfo.measures import (
    CORE_MEASURES,
    FEATURE_NAMES,
    MEASURES,
    articulation_point_count,
    assortativity,
    degree_centrality,
    degree_centralization,
    density,
    feature_vector,
    global_clustering,
    local_clustering,
    network_measures,
    reciprocity,
)

from . import oracles
from .test_graph import ego_networks


def U(*edges, vertices=()):
    return undirected_projection(DirectedGraph(vertices, edges))


TRIANGLE = [("A", "B"), ("B", "C"), ("C", "A")]
PATH = [("A", "B"), ("B", "C")]


def test_global_clustering_examples():
    assert global_clustering(U(*TRIANGLE)) == 1.0
    assert global_clustering(U(*PATH)) == 0.0
    assert global_clustering(U(*TRIANGLE, ("C", "D"))) == pytest.approx(0.6, abs=1e-12)


def test_local_clustering_examples():
    assert local_clustering(U(("E", "A"), ("E", "B"), ("A", "B")), "E") == 1.0
    assert local_clustering(U(("E", "A"), ("E", "B")), "E") == 0.0
    assert local_clustering(U(("E", "A")), "E") == 0.0
    with pytest.raises(KeyError):
        local_clustering(U(("E", "A")), "Q")


def test_density_examples():
    assert density(DirectedGraph([], [("A", "B"), ("B", "A")])) == 1.0
    assert density(DirectedGraph([], TRIANGLE)) == 0.5
    assert density(DirectedGraph(["A"])) == 0.0


def test_reciprocity_examples():
    assert reciprocity(DirectedGraph([], [("A", "B"), ("B", "A"), ("A", "C")])) == pytest.approx(2 / 3)
    assert reciprocity(DirectedGraph([], TRIANGLE)) == 0.0
    assert reciprocity(DirectedGraph([], [("A", "B"), ("B", "A")])) == 1.0


def test_degree_centrality_examples():
    g = DirectedGraph([], [("B", "A"), ("C", "A"), ("D", "A")])
    net = EgoNetwork(g, "A")
    assert degree_centrality(net, "in") == 3
    assert degree_centrality(net, "in", normalized=True) == 1.0
    assert degree_centrality(net, "out") == 0
    dyad = EgoNetwork(DirectedGraph([], [("A", "B"), ("B", "A")]), "A")
    assert degree_centrality(dyad, "total", normalized=True) == 1.0
    with pytest.raises(ValueError):
        degree_centrality(net, "sideways")


def test_centralization_examples():
    in_star = DirectedGraph([], [("B", "A"), ("C", "A"), ("D", "A")])
    assert degree_centralization(in_star, "in") == 1.0
    mutual = DirectedGraph([], [(c, l) for l in "xyz" for c in "c"] + [(l, "c") for l in "xyz"])
    assert degree_centralization(mutual, "total") == 1.0
    for mode in ("in", "out", "total"):
        assert degree_centralization(DirectedGraph([], TRIANGLE), mode) == 0.0
    assert degree_centralization(DirectedGraph(["a", "b"], [("a", "b")]), "total") == 0.0


def test_assortativity_examples():
    assert assortativity(U(("c", "a"), ("c", "b"), ("c", "d"))) == pytest.approx(-1.0, abs=1e-12)
    assert assortativity(U(*TRIANGLE)) == 0.0
    assert assortativity(U(*PATH)) == pytest.approx(-1.0, abs=1e-12)
    assert assortativity(U(("a", "b"))) == 0.0


def test_articulation_examples():
    assert articulation_point_count(U(*PATH)) == 1
    assert articulation_point_count(U(*TRIANGLE)) == 0
    bowtie = TRIANGLE + [("C", "D"), ("D", "E"), ("E", "C")]
    assert articulation_point_count(U(*bowtie)) == 1


def test_feature_names_layout():
    assert len(MEASURES) == 17 and len(CORE_MEASURES) == 16
    assert len(FEATURE_NAMES) == 33 == len(set(FEATURE_NAMES))
    assert "core_ego_out_degree" not in FEATURE_NAMES
    assert "core_ego_out_degree_norm" in FEATURE_NAMES


def test_ego_only_graph():
    fv = feature_vector(EgoNetwork(DirectedGraph(["e"]), "e"))
    assert list(fv) == list(FEATURE_NAMES)
    assert fv["full_vertex_count"] == 1 and fv["full_edge_count"] == 0
    for name, v in fv.items():
        if not name.endswith("vertex_count"):
            assert v == 0.0, name


def test_star_ego_network():
    net = EgoNetwork(DirectedGraph([], [("e", "v0")]), "e")
    fv = feature_vector(net)
    assert all(math.isfinite(v) for v in fv.values())
    assert fv["full_density"] == 0.5
    assert fv["core_vertex_count"] == 1


def test_core_equals_full_when_nothing_removed():
    g = DirectedGraph([], [("A", "B"), ("B", "C"), ("C", "A"), ("A", "C")])
    net = EgoNetwork(g, "A")
    assert k_core_reduce(net, 2).graph == g
    fv = feature_vector(net, 2)
    for m in CORE_MEASURES:
        assert fv[f"core_{m}"] == fv[f"full_{m}"]


def _oracle_measures(net):
    vs = sorted(net.graph.vertices)
    es = sorted(net.graph.edges)
    ego = net.ego
    return {
        "vertex_count": len(vs),
        "edge_count": len(es),
        "global_clustering": oracles.global_clustering(vs, es),
        "local_clustering_ego": oracles.local_clustering(vs, es, ego),
        "centralization_in": oracles.centralization(vs, es, "in"),
        "centralization_out": oracles.centralization(vs, es, "out"),
        "centralization_total": oracles.centralization(vs, es, "total"),
        "ego_in_degree": oracles.ego_degree(vs, es, ego, "in", False),
        "ego_out_degree": oracles.ego_degree(vs, es, ego, "out", False),
        "ego_total_degree": oracles.ego_degree(vs, es, ego, "total", False),
        "ego_in_degree_norm": oracles.ego_degree(vs, es, ego, "in", True),
        "ego_out_degree_norm": oracles.ego_degree(vs, es, ego, "out", True),
        "ego_total_degree_norm": oracles.ego_degree(vs, es, ego, "total", True),
        "density": oracles.density(vs, es),
        "reciprocity": oracles.reciprocity(vs, es),
        "assortativity": oracles.assortativity(vs, es),
        "articulation_points": oracles.articulation_count(vs, es),
    }


@settings(max_examples=200, deadline=None)
@given(ego_networks())
def test_measures_match_oracles(net):
    got = network_measures(net)
    want = _oracle_measures(net)
    for m in MEASURES:
        assert got[m] == pytest.approx(want[m], abs=1e-9), m


@settings(max_examples=100, deadline=None)
@given(ego_networks(), st.randoms(use_true_random=False))
def test_relabeling_invariance(net, rnd):
    names = sorted(net.graph.vertices)
    shuffled = names[:]
    rnd.shuffle(shuffled)
    f = {a: f"id_{b}" for a, b in zip(names, shuffled)}
    g2 = DirectedGraph([f[v] for v in names], [(f[u], f[v]) for u, v in net.graph.edges])
    assert feature_vector(EgoNetwork(g2, f[net.ego])) == feature_vector(net)


@settings(max_examples=100, deadline=None)
@given(ego_networks())
def test_isolated_vertex_changes_only_size_terms(net):
    g = net.graph
    g2 = DirectedGraph(set(g.vertices) | {"isolated"}, g.edges)
    a = network_measures(net)
    b = network_measures(EgoNetwork(g2, net.ego))
    assert b["vertex_count"] == a["vertex_count"] + 1
    for m in ("edge_count", "reciprocity", "ego_in_degree", "ego_out_degree", "ego_total_degree",
              "global_clustering", "local_clustering_ego", "assortativity", "articulation_points"):
        assert b[m] == a[m], m


@settings(max_examples=200, deadline=None)
@given(ego_networks(), st.integers(1, 3))
def test_feature_ranges(net, k):
    fv = feature_vector(net, k)
    assert list(fv) == list(FEATURE_NAMES)
    for name, v in fv.items():
        assert math.isfinite(v)
        if name.endswith(("density", "reciprocity", "clustering", "clustering_ego", "_norm")) or "centralization" in name:
            assert 0.0 <= v <= 1.0 + 1e-12, name
        if name.endswith("assortativity"):
            assert -1.0 <= v <= 1.0, name
        if name.endswith(("count", "degree", "articulation_points")):
            assert v >= 0 and v == int(v), name


def test_seeded_random_graphs_against_oracles():
    rng = np.random.default_rng(20240)
    for _ in range(60):
        n = int(rng.integers(3, 13))
        vs, es = oracles.random_digraph(rng, n, float(rng.uniform(0.05, 0.6)))
        net = EgoNetwork(DirectedGraph(vs, es), int(rng.integers(n)))
        got = network_measures(net)
        want = _oracle_measures(net)
        for m in MEASURES:
            assert abs(got[m] - want[m]) <= 1e-9, m
