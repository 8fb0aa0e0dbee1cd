"""
Odd-Set Cuts - Blossom inequality separation for the matching polytope
Exhaustive subset tables for small graphs, Gomory-Hu minimum odd cuts otherwise
"""

from dataclasses import dataclass
from typing import List, Literal, Optional, Set, Tuple

import networkx as nx
import numpy as np
from networkx.algorithms.flow import edmonds_karp

from flmsolver.config import SEP_TOL
from flmsolver.models.graph import Graph

SeparationMode = Literal["general", "perfect"]


def _subset_sums(w: np.ndarray, n: int) -> np.ndarray:
    """out[mask] = Σ_{b ∈ mask} w[b] for every mask over n bits"""
    out = np.zeros(1)
    for b in range(n):
        out = np.concatenate([out, out + w[b]])
    return out


@dataclass
class OddSetCut:
    """
    Violated odd-set inequality, stored in `coef · z <= rhs` form

    kind "inner": Σ_{E[U]} z <= (|U|-1)/2; kind "cut": Σ_{δ(U)} z >= 1;
    kind "doubled": odd cut of the doubled graph, affine in z.
    """
    kind: Literal["inner", "cut", "doubled"]
    vertices: Tuple[int, ...]
    violation: float
    coef: np.ndarray
    rhs: float
    copy_vertices: Tuple[int, ...] = ()

    def describe(self) -> str:
        u = "{" + ",".join(str(v) for v in self.vertices) + "}"
        if self.kind == "inner":
            return f"odd set U={u}: Σ_E[U] z exceeds (|U|-1)/2 by {self.violation:.3g}"
        if self.kind == "cut":
            return f"odd set U={u}: Σ_δ(U) z below 1 by {self.violation:.3g}"
        b = "{" + ",".join(str(v) for v in self.copy_vertices) + "}"
        return f"doubled-graph odd cut A={u}, B={b}: below 1 by {self.violation:.3g}"


class OddSetTable:
    """
    Edge sums of every vertex subset

    Index masks enumerate subsets of {0..n-1}; `inner[mask]` is Σ z over
    edges inside the subset, `degsum[mask]` the sum of vertex degrees and
    `size[mask]` its cardinality. Built by doubling, O(2^n) memory.
    """

    def __init__(self, graph: Graph, z: np.ndarray):
        n = graph.n_vertices
        self.n = n
        W = np.zeros((n, n))
        for (u, v), val in zip(graph.edges, z):
            W[u, v] = W[v, u] = val
        self.deg = W.sum(axis=1)

        inner = np.zeros(1)
        for b in range(n):
            inner = np.concatenate([inner, inner + _subset_sums(W[b, :b], b)])
        self.inner = inner
        self.degsum = _subset_sums(self.deg, n)
        self.size = _subset_sums(np.ones(n), n).astype(np.int64)
        self.odd = (self.size % 2 == 1) & (self.size >= 3)

    def members(self, mask: int) -> Tuple[int, ...]:
        return tuple(b for b in range(self.n) if (mask >> b) & 1)

    def half_floor(self) -> np.ndarray:
        """(|U|-1)/2 for every mask"""
        return (self.size - 1) / 2.0

    def inner_violation(self) -> np.ndarray:
        """Σ_{E[U]} z − (|U|-1)/2 on odd |U| >= 3, -inf elsewhere"""
        viol = np.full(self.inner.shape, -np.inf)
        viol[self.odd] = self.inner[self.odd] - self.half_floor()[self.odd]
        return viol

    def cut_violation(self) -> np.ndarray:
        """1 − Σ_{δ(U)} z on odd |U| >= 3, -inf elsewhere"""
        viol = np.full(self.inner.shape, -np.inf)
        cut = self.degsum - 2.0 * self.inner
        viol[self.odd] = 1.0 - cut[self.odd]
        return viol

    def most_violated(self, mode: SeparationMode, graph: Graph) -> Optional[OddSetCut]:
        """Most violated odd set (lowest mask on ties), None when below SEP_TOL"""
        if self.n < 3:
            return None
        viol = self.inner_violation() if mode == "general" else self.cut_violation()
        mask = int(np.argmax(viol))
        if not viol[mask] > SEP_TOL:
            return None
        members = self.members(mask)
        inside = set(members)
        if mode == "general":
            coef = np.array([1.0 if (u in inside and v in inside) else 0.0 for u, v in graph.edges])
            return OddSetCut("inner", members, float(viol[mask]), coef, (len(members) - 1) / 2.0)
        coef = np.array([-1.0 if ((u in inside) != (v in inside)) else 0.0 for u, v in graph.edges])
        return OddSetCut("cut", members, float(viol[mask]), coef, -1.0)


def doubled_graph(graph: Graph, z: np.ndarray) -> Tuple[Graph, np.ndarray]:
    """
    Copy-of-G construction

    Vertices V ∪ V' (copy of v is v + n); edges E, the copy E', and a rung
    {v, v'} per vertex. z̃ mirrors z on E and E' and puts 1 − Σ_{δ(v)} z_e
    on the rung of v (clamped at 0).

    Returns:
        (doubled graph, z̃ aligned with its edges)
    """
    n = graph.n_vertices
    deg = np.zeros(n)
    for (u, v), val in zip(graph.edges, z):
        deg[u] += val
        deg[v] += val
    edges = list(graph.edges)
    edges += [(u + n, v + n) for u, v in graph.edges]
    edges += [(v, v + n) for v in range(n)]
    z_tilde = np.concatenate([z, z, np.maximum(1.0 - deg, 0.0)])
    return Graph(2 * n, tuple(edges)), z_tilde


def _capacity_graph(n_vertices: int, edges: List[Tuple[int, int]], capacity: np.ndarray) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(n_vertices))
    # zero-capacity path keeps the graph connected
    for v in range(n_vertices - 1):
        g.add_edge(v, v + 1, capacity=0.0)
    for (u, v), c in zip(edges, capacity):
        if g.has_edge(u, v):
            g[u][v]["capacity"] += float(max(c, 0.0))
        else:
            g.add_edge(u, v, capacity=float(max(c, 0.0)))
    return g


def _cut_value(g: nx.Graph, side: Set[int]) -> float:
    return float(sum(data["capacity"] for _, _, data in nx.edge_boundary(g, side, data=True)))


def odd_tree_cuts(
    n_vertices: int, edges: List[Tuple[int, int]], capacity: np.ndarray
) -> List[Tuple[float, Tuple[int, ...]]]:
    """
    Odd fundamental cuts of the Gomory-Hu tree, lightest first

    Each value is summed from the capacities crossing the side, not read
    off the tree weight, which carries max-flow round-off.

    Args:
        n_vertices: Vertex count (every vertex a terminal)
        edges: Edge list
        capacity: Nonnegative capacity per edge

    Returns:
        (cut value, smaller side W) for each tree edge whose side is odd
    """
    if n_vertices < 2:
        return []
    g = _capacity_graph(n_vertices, edges, capacity)
    tree = nx.gomory_hu_tree(g, capacity="capacity", flow_func=edmonds_karp)
    everything = set(range(n_vertices))
    cuts = []
    for u, v in sorted(tuple(sorted(e)) for e in tree.edges()):
        pruned = tree.copy()
        pruned.remove_edge(u, v)
        side = nx.node_connected_component(pruned, u)
        if len(side) % 2 == 0:
            continue
        smaller = side if len(side) <= n_vertices - len(side) else everything - side
        cuts.append((_cut_value(g, side), tuple(sorted(smaller))))
    cuts.sort(key=lambda t: (t[0], t[1]))
    return cuts


def min_odd_cut(n_vertices: int, edges: List[Tuple[int, int]], capacity: np.ndarray) -> Tuple[float, Tuple[int, ...]]:
    """
    Minimum cut δ(W) with |W| odd (every vertex a terminal), via the
    Gomory-Hu tree

    Returns:
        (cut value, W); value is inf when no odd cut exists
    """
    cuts = odd_tree_cuts(n_vertices, edges, capacity)
    return cuts[0] if cuts else (float("inf"), ())


def _doubled_cut(graph: Graph, side: Tuple[int, ...]) -> Tuple[np.ndarray, float, Tuple[int, ...], Tuple[int, ...]]:
    """Odd cut A ∪ B' of the doubled graph as `coef · z <= rhs`"""
    n = graph.n_vertices
    A = {v for v in side if v < n}
    B = {v - n for v in side if v >= n}
    sym = A ^ B
    coef = np.array([
        float((u in A) != (v in A)) + float((u in B) != (v in B)) - float(u in sym) - float(v in sym)
        for u, v in graph.edges
    ])
    # Σ coef·z >= 1 − |A△B|, flipped to <= form
    return -coef, -(1.0 - len(sym)), tuple(sorted(A)), tuple(sorted(B))


def gomory_hu_separate(graph: Graph, z: np.ndarray, mode: SeparationMode) -> Optional[OddSetCut]:
    """
    Padberg-Rao separation

    perfect: minimum odd cut of G under z. general: minimum odd cut of the
    doubled graph, translated back to an affine inequality in z. Candidates
    are taken lightest first and only returned once `coef · z − rhs`
    exceeds SEP_TOL.
    """
    n = graph.n_vertices
    if mode == "perfect":
        if n < 3 or n % 2:
            return None
        for _, side in odd_tree_cuts(n, list(graph.edges), z):
            inside = set(side)
            coef = np.array([-1.0 if ((u in inside) != (v in inside)) else 0.0 for u, v in graph.edges])
            violation = float(coef @ z) + 1.0
            if violation > SEP_TOL:
                return OddSetCut("cut", side, violation, coef, -1.0)
        return None

    big, z_tilde = doubled_graph(graph, z)
    for _, side in odd_tree_cuts(big.n_vertices, list(big.edges), z_tilde):
        coef, rhs, A, B = _doubled_cut(graph, side)
        violation = float(coef @ z) - rhs
        if violation > SEP_TOL:
            return OddSetCut("doubled", A, violation, coef, rhs, B)
    return None
