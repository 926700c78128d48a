"""Network measures of an ego network and its k-core, assembled into a feature vector.

Clustering, assortativity and articulation points are computed on the
undirected projection; everything else on the directed graph. Quantities
that are undefined on tiny graphs are imputed as 0 so every feature is finite.
"""

from __future__ import annotations

import math

from .graph import DirectedGraph, EgoNetwork, UndirectedGraph, k_core_reduce, undirected_projection

MEASURES = (
    "vertex_count",
    "edge_count",
    "global_clustering",
    "local_clustering_ego",
    "centralization_in",
    "centralization_out",
    "centralization_total",
    "ego_in_degree",
    "ego_out_degree",
    "ego_total_degree",
    "ego_in_degree_norm",
    "ego_out_degree_norm",
    "ego_total_degree_norm",
    "density",
    "reciprocity",
    "assortativity",
    "articulation_points",
)

# The core's ego out-degree carries no information once the network is peeled.
CORE_MEASURES = tuple(m for m in MEASURES if m != "ego_out_degree")

FEATURE_NAMES = tuple(f"full_{m}" for m in MEASURES) + tuple(f"core_{m}" for m in CORE_MEASURES)

_MODES = ("in", "out", "total")


def _check_mode(mode):
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}, got {mode!r}")


def _triangles_and_triples(g: UndirectedGraph):
    adj = g.adj
    closed = 0
    for u, nbrs in adj.items():
        for v in nbrs:
            # every triangle is seen 6 times: once per ordered edge of it
            closed += len(nbrs & adj[v])
    triangles = closed // 6
    triples = sum(len(n) * (len(n) - 1) // 2 for n in adj.values())
    return triangles, triples


def global_clustering(g: UndirectedGraph) -> float:
    triangles, triples = _triangles_and_triples(g)
    if triples == 0:
        return 0.0
    return 3 * triangles / triples


def local_clustering(g: UndirectedGraph, v) -> float:
    if v not in g:
        raise KeyError(f"unknown vertex {v!r}")
    nbrs = g.adj[v]
    d = len(nbrs)
    if d < 2:
        return 0.0
    links = sum(len(g.adj[u] & nbrs) for u in nbrs) // 2
    return links / (d * (d - 1) / 2)


def density(g: DirectedGraph) -> float:
    n = len(g)
    if n <= 1:
        return 0.0
    return len(g.edges) / (n * (n - 1))


def reciprocity(g: DirectedGraph) -> float:
    m = len(g.edges)
    if m == 0:
        return 0.0
    mutual = sum(1 for u, v in g.edges if u in g.successors(v))
    return mutual / m


def _mode_degree(g: DirectedGraph, v, mode) -> int:
    if mode == "in":
        return g.in_degree(v)
    if mode == "out":
        return g.out_degree(v)
    return g.degree(v)


def degree_centrality(net: EgoNetwork, mode: str = "total", normalized: bool = False) -> float:
    """Degree of the ego; normalised by the largest attainable value when asked."""
    _check_mode(mode)
    g = net.graph
    d = _mode_degree(g, net.ego, mode)
    if not normalized:
        return float(d)
    n = len(g)
    if n <= 1:
        return 0.0
    return d / ((n - 1) if mode != "total" else 2 * (n - 1))


def degree_centralization(g: DirectedGraph, mode: str = "total") -> float:
    """Freeman degree centralization, scaled so the maximal star scores 1."""
    _check_mode(mode)
    n = len(g)
    if mode == "total":
        if n <= 2:
            return 0.0
        denom = 2 * (n - 1) * (n - 2)
    else:
        if n <= 1:
            return 0.0
        denom = (n - 1) ** 2
    degs = [_mode_degree(g, v, mode) for v in g.vertices]
    top = max(degs)
    return sum(top - d for d in degs) / denom


def assortativity(g: UndirectedGraph) -> float:
    """Degree correlation over undirected edges, each counted in both orientations."""
    if g.edge_count() < 2:
        return 0.0
    deg = {v: len(n) for v, n in g.adj.items()}
    # symmetric sample: both coordinates share mean and variance
    s1 = s2 = sxy = 0
    m2 = 0
    for u, nbrs in g.adj.items():
        du = deg[u]
        for v in nbrs:
            dv = deg[v]
            s1 += du
            s2 += du * du
            sxy += du * dv
            m2 += 1
    var = s2 * m2 - s1 * s1
    if var == 0:
        return 0.0
    r = (sxy * m2 - s1 * s1) / var
    return max(-1.0, min(1.0, r))


def articulation_points(g: UndirectedGraph) -> set:
    """Cut vertices via an iterative depth-first low-link traversal."""
    disc = {}
    low = {}
    cut = set()
    counter = 0
    for root in g.adj:
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        root_children = 0
        stack = [(root, None, iter(g.adj[root]))]
        while stack:
            v, parent, it = stack[-1]
            advanced = False
            for w in it:
                if w not in disc:
                    disc[w] = low[w] = counter
                    counter += 1
                    if v == root:
                        root_children += 1
                    stack.append((w, v, iter(g.adj[w])))
                    advanced = True
                    break
                if w != parent:
                    low[v] = min(low[v], disc[w])
            if advanced:
                continue
            stack.pop()
            if parent is not None:
                low[parent] = min(low[parent], low[v])
                if parent != root and low[v] >= disc[parent]:
                    cut.add(parent)
        if root_children > 1:
            cut.add(root)
    return cut


def articulation_point_count(g: UndirectedGraph) -> int:
    return len(articulation_points(g))


def network_measures(net: EgoNetwork) -> dict:
    """All measures of one ego network, keyed by :data:`MEASURES` names."""
    g = net.graph
    u = undirected_projection(g)
    return {
        "vertex_count": float(len(g)),
        "edge_count": float(len(g.edges)),
        "global_clustering": global_clustering(u),
        "local_clustering_ego": local_clustering(u, net.ego),
        "centralization_in": degree_centralization(g, "in"),
        "centralization_out": degree_centralization(g, "out"),
        "centralization_total": degree_centralization(g, "total"),
        "ego_in_degree": degree_centrality(net, "in"),
        "ego_out_degree": degree_centrality(net, "out"),
        "ego_total_degree": degree_centrality(net, "total"),
        "ego_in_degree_norm": degree_centrality(net, "in", normalized=True),
        "ego_out_degree_norm": degree_centrality(net, "out", normalized=True),
        "ego_total_degree_norm": degree_centrality(net, "total", normalized=True),
        "density": density(g),
        "reciprocity": reciprocity(g),
        "assortativity": assortativity(u),
        "articulation_points": float(articulation_point_count(u)),
    }


def feature_vector(net: EgoNetwork, k: int = 2) -> dict:
    """The 33 named features, in :data:`FEATURE_NAMES` order."""
    full = network_measures(net)
    core = network_measures(k_core_reduce(net, k))
    out = {f"full_{m}": full[m] for m in MEASURES}
    out.update((f"core_{m}", core[m]) for m in CORE_MEASURES)
    for name, value in out.items():
        if not math.isfinite(value):
            raise ArithmeticError(f"non-finite feature {name}={value}")
    return out
