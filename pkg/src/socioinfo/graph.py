"""Directed follow graphs, edge-list I/O and k-core reduction of ego networks."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from .errors import DataError, ParseError


class DirectedGraph:
    """Immutable directed graph with set semantics (no self-loops, no multi-edges).

    Edges are ``(follower, followed)`` pairs. Vertex identifiers are opaque
    hashable tokens, usually strings.
    """

    __slots__ = ("_vertices", "_edges", "_succ", "_pred")

    def __init__(self, vertices=(), edges=()):
        vs = set(vertices)
        es = set()
        for u, v in edges:
            if u == v:
                raise DataError(f"self-loop on vertex {u!r}")
            es.add((u, v))
            vs.add(u)
            vs.add(v)
        succ = defaultdict(set)
        pred = defaultdict(set)
        for u, v in es:
            succ[u].add(v)
            pred[v].add(u)
        self._vertices = frozenset(vs)
        self._edges = frozenset(es)
        self._succ = {v: frozenset(succ.get(v, ())) for v in vs}
        self._pred = {v: frozenset(pred.get(v, ())) for v in vs}

    @property
    def vertices(self) -> frozenset:
        return self._vertices

    @property
    def edges(self) -> frozenset:
        return self._edges

    def __len__(self) -> int:
        return len(self._vertices)

    def __contains__(self, v) -> bool:
        return v in self._vertices

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return self._vertices == other._vertices and self._edges == other._edges

    def __hash__(self):
        return hash((self._vertices, self._edges))

    def __repr__(self) -> str:
        return f"DirectedGraph(n={len(self._vertices)}, m={len(self._edges)})"

    def successors(self, v) -> frozenset:
        return self._succ[v]

    def predecessors(self, v) -> frozenset:
        return self._pred[v]

    def in_degree(self, v) -> int:
        return len(self._pred[v])

    def out_degree(self, v) -> int:
        return len(self._succ[v])

    def degree(self, v) -> int:
        """Total degree (in + out); a reciprocated pair counts twice."""
        return len(self._pred[v]) + len(self._succ[v])

    def neighbors(self, v) -> frozenset:
        """Neighbours ignoring direction."""
        return self._succ[v] | self._pred[v]

    def subgraph(self, keep) -> "DirectedGraph":
        keep = set(keep) & self._vertices
        return DirectedGraph(keep, ((u, v) for u, v in self._edges if u in keep and v in keep))


class UndirectedGraph:
    """Simple undirected graph stored as symmetric adjacency sets."""

    __slots__ = ("adj",)

    def __init__(self, adj: dict):
        self.adj = adj

    @property
    def vertices(self):
        return self.adj.keys()

    def __len__(self) -> int:
        return len(self.adj)

    def __contains__(self, v) -> bool:
        return v in self.adj

    def __eq__(self, other) -> bool:
        if not isinstance(other, UndirectedGraph):
            return NotImplemented
        return self.adj == other.adj

    def degree(self, v) -> int:
        return len(self.adj[v])

    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj.values()) // 2

    def edges(self):
        """Each undirected edge once, as a 2-tuple."""
        seen = set()
        for u, nbrs in self.adj.items():
            for v in nbrs:
                if v not in seen:
                    yield (u, v)
            seen.add(u)

    def has_edge(self, u, v) -> bool:
        return v in self.adj.get(u, ())


@dataclass(frozen=True)
class EgoNetwork:
    graph: DirectedGraph
    ego: object

    def __post_init__(self):
        if self.ego not in self.graph:
            raise DataError(f"ego {self.ego!r} is not a vertex of the graph")

    def __len__(self) -> int:
        return len(self.graph)


def undirected_projection(g: DirectedGraph) -> UndirectedGraph:
    return UndirectedGraph({v: set(g.neighbors(v)) for v in g.vertices})


def parse_edge_list(text: str) -> EgoNetwork:
    """Parse ``src dst`` lines; the first data line's source is the ego."""
    ego = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"line {lineno}: expected 2 tokens, got {len(tokens)}", lineno)
        src, dst = tokens
        if src == dst:
            raise DataError(f"line {lineno}: self-loop on {src!r}")
        if ego is None:
            ego = src
        edges.append((src, dst))
    if ego is None:
        raise DataError("edge list has no data lines; cannot derive ego")
    return EgoNetwork(DirectedGraph([ego], edges), ego)


def format_edge_list(net: EgoNetwork) -> str:
    """Serialise so that :func:`parse_edge_list` recovers the same network.

    Ego out-edges come first so the ego is recoverable. An ego with no
    out-edges cannot be expressed in this format.
    """
    g = net.graph
    ego_edges = sorted((e for e in g.edges if e[0] == net.ego), key=_edge_key)
    if not ego_edges:
        raise DataError(f"ego {net.ego!r} has no out-edges; not representable as an edge list")
    rest = sorted((e for e in g.edges if e[0] != net.ego), key=_edge_key)
    isolated = g.vertices - {v for e in g.edges for v in e}
    if isolated:
        raise DataError(f"{len(isolated)} isolated vertices not representable as an edge list")
    return "".join(f"{u} {v}\n" for u, v in ego_edges + rest)


def _edge_key(e):
    return (str(e[0]), str(e[1]))


def read_edge_list(path) -> EgoNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def k_core_reduce(net: EgoNetwork, k: int = 2) -> EgoNetwork:
    """Peel vertices of total degree < ``k`` until none remain, then re-attach the ego.

    If the ego did not survive it is put back with its edges to surviving
    vertices, so the result is always a valid ego network.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    g = net.graph
    deg = {v: g.degree(v) for v in g.vertices}
    removed = set()
    stack = [v for v, d in deg.items() if d < k]
    removed.update(stack)
    while stack:
        v = stack.pop()
        for w in g.successors(v):
            if w not in removed:
                deg[w] -= 1
                if deg[w] < k:
                    removed.add(w)
                    stack.append(w)
        for w in g.predecessors(v):
            if w not in removed:
                deg[w] -= 1
                if deg[w] < k:
                    removed.add(w)
                    stack.append(w)
    survivors = g.vertices - removed
    if not removed:
        return net
    return EgoNetwork(g.subgraph(survivors | {net.ego}), net.ego)
