"""
Matching Service - General-graph matching engine
Cardinality and min-cost matchings (networkx blossom), symmetric differences,
odd-set separation and convex decomposition into maximum matchings
"""

from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence

import networkx as nx
import numpy as np

from flmsolver.config import FEAS_TOL, ZERO_TOL, get_settings
from flmsolver.errors import CapabilityError, InfeasibilityError, InvariantError, PreconditionError
from flmsolver.models.fractional import FractionalMatching, MatchingDecomposition
from flmsolver.models.graph import Edge, Graph, Matching, as_matching, norm_edge
from flmsolver.services.odd_cuts import (
    OddSetCut, OddSetTable, SeparationMode, doubled_graph, gomory_hu_separate,
)
from flmsolver.utils.logger import logger

__all__ = [
    "max_cardinality_matching", "nu", "min_cost_maximum_matching", "min_cost_perfect_matching",
    "is_perfectly_matchable", "symmetric_difference_components", "decompose_to_maximum_matchings",
    "separate_odd_set", "doubled_graph", "Component",
]


# ============= MATCHINGS =============

def max_cardinality_matching(g: Graph) -> Matching:
    """Maximum matching (Edmonds blossom)"""
    if not g.n_edges:
        return frozenset()
    return as_matching(nx.max_weight_matching(g.to_networkx(), maxcardinality=True))


def nu(g: Graph) -> int:
    """ν(G), the size of a maximum matching"""
    return len(max_cardinality_matching(g))


def is_perfectly_matchable(g: Graph) -> bool:
    """
    Check whether G has a perfect matching

    Args:
        g: Graph

    Returns:
        True when 2·ν(G) = |V|
    """
    return 2 * nu(g) == g.n_vertices


def min_cost_maximum_matching(g: Graph, cost: Sequence[float]) -> Matching:
    """
    Minimum-cost matching among those of size ν(G)

    Weights K − cost(e) with K = Σ cost + 1 make every maximum-weight
    maximum-cardinality matching a min-cost maximum matching.

    Args:
        g: Graph
        cost: Nonnegative cost per edge, aligned with g.edges
    """
    cost = np.asarray(cost, dtype=float)
    if len(cost) != g.n_edges:
        raise PreconditionError(f"expected {g.n_edges} edge costs, got {len(cost)}")
    if np.any(cost < 0):
        raise PreconditionError("edge costs must be nonnegative")
    if not g.n_edges:
        return frozenset()
    K = float(cost.sum()) + 1.0
    mate = nx.max_weight_matching(g.to_networkx(weights=K - cost), maxcardinality=True)
    return as_matching(mate)


def min_cost_perfect_matching(g: Graph, cost: Sequence[float]) -> Matching:
    """Minimum-cost perfect matching; InfeasibilityError when none exists"""
    if not is_perfectly_matchable(g):
        raise InfeasibilityError("graph is not perfectly matchable", constraint="perfect matching")
    return min_cost_maximum_matching(g, cost)


def matching_cost(g: Graph, matching: Matching, cost: Sequence[float]) -> float:
    """
    Total cost of a matching

    Args:
        g: Graph
        matching: Edges of g
        cost: Cost per edge, aligned with g.edges

    Returns:
        Σ cost(e) over e in the matching
    """
    return float(sum(cost[g.edge_index(e)] for e in matching))


# ============= SYMMETRIC DIFFERENCE =============

@dataclass
class Component:
    """Alternating path or cycle of M △ M', edges in walk order"""
    kind: Literal["path", "cycle"]
    vertices: List[int] = field(default_factory=list)
    edges: List[Edge] = field(default_factory=list)


def symmetric_difference_components(M: Matching, M_prime: Matching) -> List[Component]:
    """
    Split M △ M' into maximal alternating paths and cycles

    Paths are walked from the endpoint whose edge lies in M'∖M (lowest such
    endpoint, else the lowest endpoint); cycles start at their lowest vertex
    with its M'∖M edge. Components are ordered by lowest vertex.
    """
    only_m = M - M_prime
    only_p = M_prime - M
    mate_m, mate_p = {}, {}
    for u, v in only_m:
        mate_m[u], mate_m[v] = v, u
    for u, v in only_p:
        mate_p[u], mate_p[v] = v, u

    vertices = sorted(set(mate_m) | set(mate_p))
    seen = set()
    components: List[Component] = []
    for root in vertices:
        if root in seen:
            continue
        # collect the component
        stack, comp = [root], set()
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            for mate in (mate_m, mate_p):
                if v in mate and mate[v] not in comp:
                    stack.append(mate[v])
        seen |= comp

        ends = sorted(v for v in comp if (v in mate_m) != (v in mate_p))
        if ends:
            p_ends = [v for v in ends if v in mate_p]
            start = p_ends[0] if p_ends else ends[0]
            kind = "path"
            use_p = start in mate_p
        else:
            start = min(comp)
            kind = "cycle"
            use_p = True

        walk_vertices, walk_edges = [start], []
        cur = start
        while True:
            mate = mate_p if use_p else mate_m
            if cur not in mate:
                break
            nxt = mate[cur]
            walk_edges.append(norm_edge(cur, nxt))
            use_p = not use_p
            if nxt == start:
                break
            walk_vertices.append(nxt)
            cur = nxt
        components.append(Component(kind, walk_vertices, walk_edges))
    return components


# ============= SEPARATION =============

def separate_odd_set(
    g: Graph,
    z: FractionalMatching,
    mode: SeparationMode = "general",
    method: Literal["auto", "exhaustive", "gomory-hu"] = "auto",
) -> Optional[OddSetCut]:
    """
    Find a violated odd-set inequality

    Args:
        g: Graph
        z: Point with degree constraints already satisfied
        mode: general (Σ_{E[U]} z <= (|U|-1)/2) or perfect (Σ_{δ(U)} z >= 1)
        method: exhaustive enumeration up to the configured vertex cap, or
            Gomory-Hu minimum odd cuts

    Returns:
        The most violated inequality found, or None
    """
    cap = get_settings().exhaustive_separation_cap
    if method == "exhaustive" and g.n_vertices > cap:
        raise CapabilityError(f"exhaustive separation capped at {cap} vertices (|V|={g.n_vertices})")
    values = np.asarray(z.z, dtype=float)
    if method == "gomory-hu" or (method == "auto" and g.n_vertices > cap):
        return gomory_hu_separate(g, values, mode)
    return OddSetTable(g, values).most_violated(mode, g)


# ============= DECOMPOSITION =============

def _check_point(g: Graph, z: np.ndarray, target: int) -> None:
    if np.any(z < -FEAS_TOL):
        raise InfeasibilityError("negative edge value", constraint="nonnegativity")
    deg = g.incidence() @ z if g.n_edges else np.zeros(g.n_vertices)
    over = np.flatnonzero(deg > 1.0 + FEAS_TOL)
    if len(over):
        v = int(over[0])
        raise InfeasibilityError(f"degree of vertex {v} is {deg[v]:.6g} > 1", constraint=f"degree({v})")
    if abs(z.sum() - target) > FEAS_TOL * max(1, g.n_edges):
        raise InfeasibilityError(f"Σ z = {z.sum():.6g} differs from nu = {target}", constraint="size")


def _face_weights(g: Graph, table: OddSetTable, t: float, tol: float) -> np.ndarray:
    """Sum of the normals of the constraints tight at the residual"""
    tight_vertex = table.deg >= t - tol
    k = table.half_floor()
    tight_sets = np.flatnonzero(table.odd & (table.inner >= t * k - tol))
    w = np.zeros(g.n_edges)
    for pos, (u, v) in enumerate(g.edges):
        w[pos] = float(tight_vertex[u]) + float(tight_vertex[v])
        if len(tight_sets):
            w[pos] += float(np.count_nonzero(((tight_sets >> u) & 1) & ((tight_sets >> v) & 1)))
    return w


def decompose_to_maximum_matchings(g: Graph, z: FractionalMatching) -> MatchingDecomposition:
    """
    Write a point of P_MM(G) as a convex combination of maximum matchings

    Peels matchings off the residual r ∈ t·P_MM(G), starting at r = z,
    t = 1. Each peeled matching is a maximum-weight maximum matching of
    the support under weights counting the constraints tight at r, so it
    lies in the minimal face of r; the step is the largest ε keeping
    r − εχ_M inside (t − ε)·P_MM(G). Every step tightens a new
    constraint, so at most |E| + 1 matchings are peeled.

    Args:
        g: Graph (at most `exhaustive_separation_cap` vertices)
        z: Point of P_MM(G) within 1e-7; entries below 1e-9 count as 0

    Raises:
        InfeasibilityError: z violates a degree, size or odd-set constraint
        CapabilityError: graph above the exhaustive cap
    """
    cap = get_settings().exhaustive_separation_cap
    if g.n_vertices > cap:
        raise CapabilityError(f"decomposition needs odd-set tables, capped at {cap} vertices")

    values = np.where(np.asarray(z.z, dtype=float) <= ZERO_TOL, 0.0, np.asarray(z.z, dtype=float))
    target = nu(g)
    _check_point(g, values, target)
    if target == 0:
        return MatchingDecomposition([frozenset()], [1.0])

    table = OddSetTable(g, values)
    worst = table.most_violated("general", g)
    if worst is not None:
        raise InfeasibilityError(worst.describe(), constraint="odd set " + str(worst.vertices))

    r, t = values.copy(), 1.0
    gamma: dict = {}
    limit = 2 * g.n_edges + g.n_vertices
    peels = 0
    while t > ZERO_TOL and r.max() > ZERO_TOL:
        if peels >= limit:
            raise InvariantError("decomposition did not terminate", {"t": t, "r": r.tolist(), "peels": peels})
        table = OddSetTable(g, r)
        support = [p for p in range(g.n_edges) if r[p] > 0.0]

        M, tol = None, FEAS_TOL
        while tol >= 1e-15:
            w = _face_weights(g, table, t, tol)
            sub = g.subgraph(support)
            mate = nx.max_weight_matching(sub.to_networkx(weights=[w[p] + 1.0 for p in support]),
                                          maxcardinality=True)
            candidate = as_matching(mate)
            chi = g.indicator(candidate)
            bound = float(np.count_nonzero(table.deg >= t - tol)) + float(
                (np.floor(table.half_floor()) * (table.odd & (table.inner >= t * table.half_floor() - tol))).sum()
            )
            if len(candidate) == target and float(w @ chi) >= bound - 0.5:
                M = candidate
                break
            tol /= 100.0
        if M is None:
            raise InvariantError("no maximum matching in the face of the residual", {"t": t, "r": r.tolist()})

        chi = g.indicator(M)
        eps = min(t, float(r[chi > 0].min()) if len(M) else t)
        covered = (g.incidence() @ chi) > 0 if g.n_edges else np.zeros(g.n_vertices, dtype=bool)
        slack_v = t - table.deg
        free = (~covered) & (slack_v > 0)
        if np.any(free):
            eps = min(eps, float(slack_v[free].min()))
        m_inner = OddSetTable(g, chi).inner
        k = table.half_floor()
        deficit = k - m_inner
        slack_u = t * k - table.inner
        active = table.odd & (deficit > 0.5) & (slack_u > 0)
        if np.any(active):
            eps = min(eps, float((slack_u[active] / deficit[active]).min()))

        if eps <= 0.0:
            raise InvariantError("decomposition step vanished", {"t": t, "r": r.tolist(), "matching": sorted(M)})
        gamma[M] = gamma.get(M, 0.0) + eps
        r = np.maximum(r - eps * chi, 0.0)
        t -= eps
        peels += 1

    total = sum(gamma.values())
    decomposition = MatchingDecomposition.from_gamma({m: c / total for m, c in gamma.items()})
    logger.debug(f"Decomposition | Peels: {peels} | Matchings: {len(decomposition)} | Residual: {t:.2e}")
    return decomposition
