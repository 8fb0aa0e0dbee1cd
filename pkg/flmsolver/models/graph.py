"""
Graph - Simple undirected compatibility graph over clients
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from flmsolver.errors import PreconditionError

Edge = Tuple[int, int]
Matching = FrozenSet[Edge]


def norm_edge(u: int, v: int) -> Edge:
    """Return the edge as an ordered (min, max) pair"""
    return (u, v) if u < v else (v, u)


def as_matching(edges: Iterable[Sequence[int]]) -> Matching:
    return frozenset(norm_edge(int(e[0]), int(e[1])) for e in edges)


@dataclass(frozen=True)
class Graph:
    """
    Simple graph with vertices 0..n_vertices-1

    Edge order is preserved; every per-edge array in the package is aligned
    with `edges`.
    """
    n_vertices: int
    edges: Tuple[Edge, ...]
    _index: Dict[Edge, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        normalized = tuple(norm_edge(int(u), int(v)) for u, v in self.edges)
        index: Dict[Edge, int] = {}
        for pos, (u, v) in enumerate(normalized):
            if u == v:
                raise PreconditionError(f"self-loop at vertex {u}")
            if u < 0 or v >= self.n_vertices:
                raise PreconditionError(f"edge ({u}, {v}) outside vertex range 0..{self.n_vertices - 1}")
            if (u, v) in index:
                raise PreconditionError(f"duplicate edge ({u}, {v})")
            index[(u, v)] = pos
        object.__setattr__(self, "edges", normalized)
        object.__setattr__(self, "_index", index)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_index(self, e: Sequence[int]) -> int:
        """Position of edge e in `edges` (KeyError when absent)"""
        return self._index[norm_edge(int(e[0]), int(e[1]))]

    def has_edge(self, u: int, v: int) -> bool:
        return norm_edge(u, v) in self._index

    def incidence(self) -> np.ndarray:
        """Vertex-by-edge 0/1 incidence matrix"""
        inc = np.zeros((self.n_vertices, self.n_edges))
        for pos, (u, v) in enumerate(self.edges):
            inc[u, pos] = 1.0
            inc[v, pos] = 1.0
        return inc

    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=int).reshape(-1, 2)

    def neighbors(self) -> List[List[int]]:
        adj: List[List[int]] = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def to_networkx(self, weights: Optional[Sequence[float]] = None) -> nx.Graph:
        """Build a networkx graph; optional per-edge weights go to attribute 'weight'"""
        g = nx.Graph()
        g.add_nodes_from(range(self.n_vertices))
        if weights is None:
            g.add_edges_from(self.edges)
        else:
            for (u, v), w in zip(self.edges, weights):
                g.add_edge(u, v, weight=w)
        return g

    def subgraph(self, keep: Iterable[int]) -> "Graph":
        """Same vertex set, only the edges at the given positions"""
        return Graph(self.n_vertices, tuple(self.edges[p] for p in keep))

    def is_matching(self, edges: Iterable[Edge]) -> bool:
        seen = set()
        for u, v in edges:
            if u in seen or v in seen:
                return False
            seen.update((u, v))
        return True

    def indicator(self, matching: Iterable[Edge]) -> np.ndarray:
        """Characteristic vector of a set of edges"""
        chi = np.zeros(self.n_edges)
        for e in matching:
            chi[self.edge_index(e)] = 1.0
        return chi
