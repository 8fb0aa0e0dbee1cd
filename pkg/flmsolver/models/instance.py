"""
Instance Models - FLM and UFL instances and their integral solutions
Pydantic models mirroring the JSON schema; numpy views are cached lazily
"""

from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, PrivateAttr, computed_field

from flmsolver.models.graph import Edge, Graph

Number = Union[int, float]


class Facility(BaseModel):
    """Facility with its opening cost f(i)"""
    model_config = ConfigDict(frozen=True)

    id: int
    label: Optional[str] = None
    opening_cost: Number


class Client(BaseModel):
    """Client (vertex of the compatibility graph)"""
    model_config = ConfigDict(frozen=True)

    id: int
    label: Optional[str] = None


class FlmInstance(BaseModel):
    """
    Facility Location with Matching instance (F, V, E, f, d)

    The metric is indexed over facilities then clients: client j sits at
    row/column n_facilities + j. Raw JSON-shaped values are kept as given so
    that write(read(file)) is exact; numeric work goes through the cached
    numpy properties.
    """
    model_config = ConfigDict(frozen=True)

    facilities: List[Facility]
    clients: List[Client]
    metric: List[List[Number]]
    edges: List[Tuple[int, int]]

    _dist: Optional[np.ndarray] = PrivateAttr(default=None)
    _graph: Optional[Graph] = PrivateAttr(default=None)
    _pair: Optional[np.ndarray] = PrivateAttr(default=None)

    @property
    def n_facilities(self) -> int:
        return len(self.facilities)

    @property
    def n_clients(self) -> int:
        return len(self.clients)

    @property
    def dist(self) -> np.ndarray:
        """Full metric as a float matrix over F ∪ V"""
        if self._dist is None:
            self._dist = np.asarray(self.metric, dtype=float)
        return self._dist

    @property
    def opening(self) -> np.ndarray:
        return np.array([f.opening_cost for f in self.facilities], dtype=float)

    @property
    def client_dist(self) -> np.ndarray:
        """Facility-by-client distances d(i, j)"""
        nf = self.n_facilities
        return self.dist[:nf, nf:]

    @property
    def graph(self) -> Graph:
        if self._graph is None:
            self._graph = Graph(self.n_clients, tuple((int(u), int(v)) for u, v in self.edges))
        return self._graph

    @property
    def pair_dist(self) -> np.ndarray:
        """Facility-by-edge matrix of d(i, e) = d(i, j) + d(i, k)"""
        if self._pair is None:
            ea = self.graph.edge_array()
            cd = self.client_dist
            self._pair = cd[:, ea[:, 0]] + cd[:, ea[:, 1]] if len(ea) else np.zeros((self.n_facilities, 0))
        return self._pair

    @property
    def edge_lengths(self) -> np.ndarray:
        """Vector of d(e) = d(j, k) aligned with graph.edges"""
        nf = self.n_facilities
        ea = self.graph.edge_array()
        if not len(ea):
            return np.zeros(0)
        return self.dist[nf + ea[:, 0], nf + ea[:, 1]]


class FlmSolution(BaseModel):
    """
    Integral FLM solution (S, M, σ)

    `assignment[k]` is the facility serving `matching[k]`.
    """
    open_set: List[int]
    matching: List[Edge]
    assignment: List[int]
    opening_cost_total: float
    connection_cost_total: float

    @computed_field  # type: ignore[misc]
    @property
    def total_cost(self) -> float:
        return self.opening_cost_total + self.connection_cost_total


class UflInstance(BaseModel):
    """Uncapacitated facility location instance with facility-by-client costs"""
    model_config = ConfigDict(frozen=True)

    facilities: List[Facility]
    clients: List[Client]
    assignment_cost: List[List[Number]]

    _cost: Optional[np.ndarray] = PrivateAttr(default=None)

    @property
    def n_facilities(self) -> int:
        return len(self.facilities)

    @property
    def n_clients(self) -> int:
        return len(self.clients)

    @property
    def cost(self) -> np.ndarray:
        if self._cost is None:
            self._cost = np.asarray(self.assignment_cost, dtype=float).reshape(self.n_facilities, self.n_clients)
        return self._cost

    @property
    def opening(self) -> np.ndarray:
        return np.array([f.opening_cost for f in self.facilities], dtype=float)


class UflSolution(BaseModel):
    """
    Integral UFL solution (S, σ)

    `center[j]` is the cluster center whose close neighbourhood meets j's.
    """
    open_set: List[int]
    assignment: List[int]
    center: List[int] = []
    opening_cost_total: float
    connection_cost_total: float

    @computed_field  # type: ignore[misc]
    @property
    def total_cost(self) -> float:
        return self.opening_cost_total + self.connection_cost_total
