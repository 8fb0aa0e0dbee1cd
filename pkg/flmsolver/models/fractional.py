"""
Fractional Solutions - Numeric containers for LP points and decompositions
"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from flmsolver.models.graph import Edge, Graph, Matching


@dataclass
class FractionalMatching:
    """Point z of the edge space, aligned with graph.edges"""
    z: np.ndarray

    def as_dict(self, graph: Graph) -> Dict[Edge, float]:
        return {e: float(v) for e, v in zip(graph.edges, self.z)}


@dataclass
class MatchingDecomposition:
    """Convex combination Σ γ_M χ^M of maximum matchings"""
    matchings: List[Matching] = field(default_factory=list)
    coefficients: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.matchings)

    def reconstruct(self, graph: Graph) -> np.ndarray:
        z = np.zeros(graph.n_edges)
        for m, g in zip(self.matchings, self.coefficients):
            z += g * graph.indicator(m)
        return z

    def as_gamma(self) -> Dict[Matching, float]:
        gamma: Dict[Matching, float] = {}
        for m, g in zip(self.matchings, self.coefficients):
            gamma[m] = gamma.get(m, 0.0) + g
        return gamma

    @classmethod
    def from_gamma(cls, gamma: Dict[Matching, float]) -> "MatchingDecomposition":
        ordered = sorted(gamma.items(), key=lambda kv: sorted(kv[0]))
        return cls([m for m, _ in ordered], [g for _, g in ordered])


@dataclass
class FractionalFlm:
    """
    LP_FLM point (x, y)

    x has shape (n_facilities, n_edges) aligned with `edges`; y has length
    n_facilities.
    """
    x: np.ndarray
    y: np.ndarray
    edges: Tuple[Edge, ...]
    n_clients: int

    @property
    def x_edge(self) -> np.ndarray:
        """Marginals x_e = Σ_i x_{i,e}"""
        return self.x.sum(axis=0)

    @property
    def x_client(self) -> np.ndarray:
        """Facility-by-client flow x_{i,j} = Σ_{e∈δ(j)} x_{i,e}"""
        inc = np.zeros((self.n_clients, len(self.edges)))
        for pos, (u, v) in enumerate(self.edges):
            inc[u, pos] = 1.0
            inc[v, pos] = 1.0
        return self.x @ inc.T

    def copy(self) -> "FractionalFlm":
        return FractionalFlm(self.x.copy(), self.y.copy(), self.edges, self.n_clients)


@dataclass
class UflFractional:
    """LP_UFL point: x of shape (n_facilities, n_clients), y of length n_facilities"""
    x: np.ndarray
    y: np.ndarray
