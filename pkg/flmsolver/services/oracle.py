"""
Oracle Service - Exact brute-force solvers used as ground truth
"""

import math
from typing import List, Tuple

from flmsolver.config import get_settings
from flmsolver.errors import CapabilityError
from flmsolver.models.graph import Graph, Matching, norm_edge
from flmsolver.models.instance import FlmInstance, UflInstance
from flmsolver.models.reports import ExactResult, Relaxation
from flmsolver.services import matching as mm
from flmsolver.services.instances import build_solution, edge_set_distances
from flmsolver.services.lp import solve_lp_flm
from flmsolver.utils.logger import logger


def exact_solve(inst: FlmInstance) -> ExactResult:
    """
    Optimal FLM solution by enumerating facility subsets

    For a fixed open set S the best matching is a min-cost maximum matching
    under d(S, e), so only the subsets are enumerated.

    Raises:
        CapabilityError: more facilities than settings.oracle_facility_cap
    """
    nf = inst.n_facilities
    cap = get_settings().oracle_facility_cap
    if nf > cap:
        raise CapabilityError(f"exact_solve is capped at {cap} facilities (|F|={nf})")
    g = inst.graph
    if mm.nu(g) == 0:
        return ExactResult(optimum=0.0, optimal_solution=build_solution(inst, [], []), facility_subsets_evaluated=1)

    f = inst.opening
    best_cost, best = math.inf, None
    evaluated = 0
    for mask in range(1, 1 << nf):
        S = [i for i in range(nf) if (mask >> i) & 1]
        evaluated += 1
        opening = float(f[S].sum())
        if opening >= best_cost:
            continue
        dist_S, argmin_S = edge_set_distances(inst, S)
        M = mm.min_cost_maximum_matching(g, dist_S)
        total = opening + float(sum(dist_S[g.edge_index(e)] for e in M))
        if total < best_cost - 1e-12:
            best_cost = total
            pairs = sorted(M)
            best = (S, pairs, [int(argmin_S[g.edge_index(e)]) for e in pairs])

    S, pairs, sigma = best
    solution = build_solution(inst, S, pairs, sigma)
    logger.debug(f"Exact | Subsets: {evaluated} | Optimum: {solution.total_cost:.6f}")
    return ExactResult(optimum=solution.total_cost, optimal_solution=solution, facility_subsets_evaluated=evaluated)


def _all_matchings(g: Graph) -> List[List[Tuple[int, int]]]:
    adj = g.neighbors()
    found: List[List[Tuple[int, int]]] = []

    def extend(v: int, used: set, current: list) -> None:
        while v < g.n_vertices and v in used:
            v += 1
        if v >= g.n_vertices:
            found.append(list(current))
            return
        extend(v + 1, used, current)
        for u in adj[v]:
            if u > v and u not in used:
                used.update((u, v))
                current.append(norm_edge(u, v))
                extend(v + 1, used, current)
                current.pop()
                used.difference_update((u, v))

    extend(0, set(), [])
    return found


def brute_force_matchings(g: Graph) -> List[Matching]:
    """
    Every maximum matching, by exhaustive enumeration

    Raises:
        CapabilityError: more vertices than settings.brute_force_vertex_cap
    """
    cap = get_settings().brute_force_vertex_cap
    if g.n_vertices > cap:
        raise CapabilityError(f"brute_force_matchings is capped at {cap} vertices (|V|={g.n_vertices})")
    matchings = _all_matchings(g)
    size = max(len(m) for m in matchings)
    return sorted((frozenset(m) for m in matchings if len(m) == size), key=sorted)


def integrality_gap(inst: FlmInstance, relaxation: Relaxation = "full") -> float:
    """
    Exact optimum / LP optimum (1.0 when both are 0, inf when only the LP is)
    """
    exact = exact_solve(inst).optimum
    lp = solve_lp_flm(inst, relaxation=relaxation).value
    if lp <= 1e-12:
        return 1.0 if exact <= 1e-12 else math.inf
    return exact / lp


def exact_solve_ufl(ufl: UflInstance) -> Tuple[float, List[int]]:
    """
    Optimal UFL cost and open set by enumerating facility subsets

    Raises:
        CapabilityError: more facilities than settings.oracle_facility_cap
    """
    nf = ufl.n_facilities
    cap = get_settings().oracle_facility_cap
    if nf > cap:
        raise CapabilityError(f"exact_solve_ufl is capped at {cap} facilities (|F|={nf})")
    if ufl.n_clients == 0:
        return 0.0, []
    best_cost, best_set = math.inf, []
    for mask in range(1, 1 << nf):
        S = [i for i in range(nf) if (mask >> i) & 1]
        total = float(ufl.opening[S].sum() + ufl.cost[S].min(axis=0).sum())
        if total < best_cost - 1e-12:
            best_cost, best_set = total, S
    return best_cost, best_set
