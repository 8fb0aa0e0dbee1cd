"""
Instances Service - Validation, distances, costs, generators and fixtures
"""

from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

from flmsolver.config import METRIC_TOL, OBJ_REL_TOL
from flmsolver.errors import FeasibilityError, PreconditionError, UnknownIdentifierError
from flmsolver.models.graph import Edge, norm_edge
from flmsolver.models.instance import Client, Facility, FlmInstance, FlmSolution, UflInstance
from flmsolver.services import matching as mm
from flmsolver.utils.logger import logger

MAX_REPORTED = 20

FIXTURES = ("gap-2fac", "colocated-unit", "triangle-3-2", "collinear-3")


# ============= VALIDATION =============

def validate_instance(inst: FlmInstance) -> List[str]:
    """
    Check every FlmInstance invariant

    Args:
        inst: Instance to check

    Returns:
        Violation descriptions naming the offending indices (empty when valid)
    """
    violations: List[str] = []
    nf, nc = inst.n_facilities, inst.n_clients
    n = nf + nc

    for pos, fac in enumerate(inst.facilities):
        if fac.id != pos:
            violations.append(f"facility at position {pos} has id {fac.id} (ids must be 0..{nf - 1} in order)")
        if fac.opening_cost < 0:
            violations.append(f"negative opening cost at facility {pos}: {fac.opening_cost}")
    for pos, cli in enumerate(inst.clients):
        if cli.id != pos:
            violations.append(f"client at position {pos} has id {cli.id} (ids must be 0..{nc - 1} in order)")

    seen = set()
    for u, v in inst.edges:
        if not (0 <= u < nc and 0 <= v < nc):
            violations.append(f"edge ({u}, {v}) references an unknown client")
            continue
        if u == v:
            violations.append(f"self-loop edge at client {u}")
            continue
        e = norm_edge(u, v)
        if e in seen:
            violations.append(f"duplicate edge ({e[0]}, {e[1]})")
        seen.add(e)

    if len(inst.metric) != n or any(len(row) != n for row in inst.metric):
        violations.append(f"metric must be a {n}x{n} matrix over facilities then clients")
        return violations

    D = inst.dist
    if not np.all(np.isfinite(D)):
        violations.append("metric has non-finite entries")
        return violations

    for a, b in np.argwhere(D < -METRIC_TOL)[:MAX_REPORTED]:
        violations.append(f"negative distance d({a},{b}) = {D[a, b]}")
    for a in np.flatnonzero(np.abs(np.diag(D)) > METRIC_TOL)[:MAX_REPORTED]:
        violations.append(f"nonzero diagonal d({a},{a}) = {D[a, a]}")
    for a, b in np.argwhere(np.triu(np.abs(D - D.T) > METRIC_TOL))[:MAX_REPORTED]:
        violations.append(f"asymmetric metric at ({a},{b}): {D[a, b]} != {D[b, a]}")

    reported = 0
    for k in range(n):
        bad = np.argwhere(D > D[:, k:k + 1] + D[k:k + 1, :] + METRIC_TOL)
        for a, b in bad:
            if reported >= MAX_REPORTED:
                break
            violations.append(
                f"triangle inequality violated for ({a},{b},{k}): "
                f"d({a},{b})={D[a, b]} > d({a},{k})+d({k},{b})={D[a, k] + D[k, b]}"
            )
            reported += 1
    return violations


def _check_facility(inst: FlmInstance, i: int) -> None:
    if not 0 <= i < inst.n_facilities:
        raise UnknownIdentifierError(f"unknown facility {i}")


def _check_pair(inst: FlmInstance, e: Sequence[int]) -> Edge:
    if len(e) != 2:
        raise UnknownIdentifierError(f"client pair expected, got {e}")
    for j in e:
        if not 0 <= j < inst.n_clients:
            raise UnknownIdentifierError(f"unknown client {j}")
    return norm_edge(int(e[0]), int(e[1]))


# ============= DISTANCES =============

def pair_distance(inst: FlmInstance, i: int, e: Sequence[int]) -> float:
    """d(i, e) = d(i, j) + d(i, k)"""
    _check_facility(inst, i)
    j, k = _check_pair(inst, e)
    cd = inst.client_dist
    return float(cd[i, j] + cd[i, k])


def edge_length(inst: FlmInstance, e: Sequence[int]) -> float:
    """d(e) = d(j, k)"""
    j, k = _check_pair(inst, e)
    nf = inst.n_facilities
    return float(inst.dist[nf + j, nf + k])


def set_distance(
    inst: FlmInstance, S: Iterable[int], t: Union[int, Sequence[int]]
) -> Tuple[float, int]:
    """
    Distance from a facility set to a client or a client pair

    Args:
        inst: Instance
        S: Nonempty facility subset
        t: Client index, or a client pair

    Returns:
        (min distance, minimizing facility); ties go to the lowest index
    """
    facilities = sorted(set(S))
    if not facilities:
        raise PreconditionError("set_distance needs a nonempty facility set")
    for i in facilities:
        _check_facility(inst, i)
    if isinstance(t, (int, np.integer)):
        if not 0 <= t < inst.n_clients:
            raise UnknownIdentifierError(f"unknown client {t}")
        values = inst.client_dist[facilities, int(t)]
    else:
        j, k = _check_pair(inst, t)
        values = inst.client_dist[facilities, j] + inst.client_dist[facilities, k]
    pos = int(np.argmin(values))
    return float(values[pos]), facilities[pos]


def edge_set_distances(inst: FlmInstance, S: Iterable[int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    d(S, e) for every edge of the compatibility graph

    Returns:
        (distance per edge, argmin facility per edge)
    """
    facilities = np.array(sorted(set(S)), dtype=int)
    if not len(facilities):
        raise PreconditionError("edge_set_distances needs a nonempty facility set")
    P = inst.pair_dist[facilities]
    if P.shape[1] == 0:
        return np.zeros(0), np.zeros(0, dtype=int)
    pos = np.argmin(P, axis=0)
    return P[pos, np.arange(P.shape[1])], facilities[pos]


# ============= SOLUTIONS =============

def check_solution(inst: FlmInstance, sol: FlmSolution, check_costs: bool = True) -> List[str]:
    """
    Itemized feasibility check of an integral solution

    Args:
        inst: Instance
        sol: Candidate solution
        check_costs: Also compare the reported totals with recomputed ones

    Returns:
        Violation descriptions (empty when feasible)
    """
    violations: List[str] = []
    nf, nc = inst.n_facilities, inst.n_clients
    graph = inst.graph
    open_set = set(sol.open_set)

    for i in sorted(open_set):
        if not 0 <= i < nf:
            violations.append(f"unknown facility {i} in open set")

    if len(sol.assignment) != len(sol.matching):
        violations.append(
            f"assignment has {len(sol.assignment)} entries for {len(sol.matching)} matched pairs"
        )

    covered = set()
    for pos, (u, v) in enumerate(sol.matching):
        if not (0 <= u < nc and 0 <= v < nc) or not graph.has_edge(u, v):
            violations.append(f"edge ({u}, {v}) not compatible")
        for w in (u, v):
            if w in covered:
                violations.append(f"matching not disjoint at client {w}")
            covered.add(w)
        if pos < len(sol.assignment) and sol.assignment[pos] not in open_set:
            violations.append(f"assignment target not open: facility {sol.assignment[pos]} for pair ({u}, {v})")

    nu = mm.nu(graph)
    if len(sol.matching) < nu:
        violations.append(f"matching not maximum (|M|={len(sol.matching)} < nu={nu})")
    if sol.matching and not open_set:
        violations.append("no facility open")

    if check_costs and not violations:
        opening, connection = _costs(inst, sol)
        for name, reported, actual in (
            ("opening", sol.opening_cost_total, opening),
            ("connection", sol.connection_cost_total, connection),
        ):
            if abs(reported - actual) > OBJ_REL_TOL * max(1.0, abs(actual)):
                violations.append(f"reported {name} cost {reported} differs from recomputed {actual}")
    return violations


def _costs(inst: FlmInstance, sol: FlmSolution) -> Tuple[float, float]:
    f = inst.opening
    opening = float(sum(f[i] for i in set(sol.open_set)))
    connection = float(sum(pair_distance(inst, i, e) for e, i in zip(sol.matching, sol.assignment)))
    return opening, connection


def solution_cost(inst: FlmInstance, sol: FlmSolution) -> Tuple[float, float, float]:
    """
    Cost decomposition of a solution

    Returns:
        (total, opening, connection)

    Raises:
        FeasibilityError: closed assignment target, non-maximum matching, ...
    """
    violations = check_solution(inst, sol, check_costs=False)
    if violations:
        raise FeasibilityError(violations)
    opening, connection = _costs(inst, sol)
    return opening + connection, opening, connection


def build_solution(
    inst: FlmInstance,
    open_set: Iterable[int],
    matching: Iterable[Sequence[int]],
    assignment: Optional[Sequence[int]] = None,
) -> FlmSolution:
    """
    Assemble an FlmSolution with recomputed totals

    When `assignment` is None each pair goes to its nearest open facility.
    Pairs are sorted; a given assignment follows its pair.
    """
    open_list = sorted(set(int(i) for i in open_set))
    pairs = [norm_edge(int(e[0]), int(e[1])) for e in matching]
    if assignment is None:
        assignment = [set_distance(inst, open_list, e)[1] for e in pairs] if pairs else []
    order = sorted(range(len(pairs)), key=lambda p: pairs[p])
    pairs = [pairs[p] for p in order]
    assigned = [int(assignment[p]) for p in order]
    sol = FlmSolution(
        open_set=open_list, matching=pairs, assignment=assigned,
        opening_cost_total=0.0, connection_cost_total=0.0,
    )
    opening, connection = _costs(inst, sol)
    return sol.model_copy(update={"opening_cost_total": opening, "connection_cost_total": connection})


# ============= CONSTRUCTION =============

def make_instance(
    opening: Sequence[float],
    metric: Union[np.ndarray, Sequence[Sequence[float]]],
    edges: Iterable[Sequence[int]],
    facility_labels: Optional[Sequence[str]] = None,
    client_labels: Optional[Sequence[str]] = None,
) -> FlmInstance:
    """Build an FlmInstance from plain arrays (metric over facilities then clients)"""
    metric_rows = metric.tolist() if isinstance(metric, np.ndarray) else [list(r) for r in metric]
    nf = len(opening)
    nc = len(metric_rows) - nf
    # unlabelled entries leave `label` unset so it is not written back
    facilities = [
        Facility(id=i, opening_cost=opening[i], **({"label": facility_labels[i]} if facility_labels else {}))
        for i in range(nf)
    ]
    clients = [Client(id=j, **({"label": client_labels[j]} if client_labels else {})) for j in range(nc)]
    return FlmInstance(
        facilities=facilities, clients=clients, metric=metric_rows,
        edges=[(int(e[0]), int(e[1])) for e in edges],
    )


def metric_closure(D: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths (Floyd-Warshall over numpy rows)"""
    D = D.copy()
    for k in range(D.shape[0]):
        D = np.minimum(D, D[:, k:k + 1] + D[k:k + 1, :])
    return D


def reduce_ufl_to_flm(ufl: UflInstance) -> FlmInstance:
    """
    UFL -> FLM reduction: copy every client at distance 0, match each client
    with its copy, and double the opening costs

    The metric is the shortest-path closure of the facility-client costs;
    under the three-hop inequality it agrees with the given costs.
    """
    nf, nc = ufl.n_facilities, ufl.n_clients
    n = nf + nc
    base = np.full((n, n), np.inf)
    np.fill_diagonal(base, 0.0)
    base[:nf, nf:] = ufl.cost
    base[nf:, :nf] = ufl.cost.T
    closure = metric_closure(base) if nf else np.where(np.isinf(base), 0.0, base)

    if nf and not np.allclose(closure[:nf, nf:], ufl.cost, atol=METRIC_TOL, rtol=0.0):
        logger.warning("UFL costs violate the three-hop inequality; reduced metric uses shortest paths")

    # copy j of client j sits at index nf + nc + j and shares its row
    source = np.concatenate([np.arange(n), nf + np.arange(nc)])
    metric = closure[np.ix_(source, source)]
    labels = [c.label or f"c{c.id}" for c in ufl.clients]
    return make_instance(
        opening=[2 * f.opening_cost for f in ufl.facilities],
        metric=metric,
        edges=[(j, j + nc) for j in range(nc)],
        facility_labels=[f.label for f in ufl.facilities] if all(f.label for f in ufl.facilities) else None,
        client_labels=labels + [f"{lab}'" for lab in labels],
    )


# ============= GENERATORS =============

def generate_euclidean(
    n_fac: int,
    n_cli: int,
    edge_probability: float,
    box_size: float = 100.0,
    seed: int = 0,
    ensure_perfect: bool = False,
) -> FlmInstance:
    """
    Random Euclidean instance in a square

    Args:
        n_fac: Number of facilities (>= 1)
        n_cli: Number of clients (>= 0)
        edge_probability: Independent probability of each compatible pair
        box_size: Side of the square; opening costs are uniform in [0, box_size]
        seed: RNG seed (same seed, same instance)
        ensure_perfect: Plant a random perfect matching (n_cli must be even)
    """
    if n_fac < 1 or n_cli < 0:
        raise PreconditionError("need n_fac >= 1 and n_cli >= 0")
    if not 0.0 <= edge_probability <= 1.0:
        raise PreconditionError(f"edge_probability must lie in [0, 1], got {edge_probability}")
    if ensure_perfect and n_cli % 2:
        raise PreconditionError("ensure_perfect needs an even number of clients")

    rng = np.random.default_rng(seed)
    points = rng.uniform(0.0, box_size, size=(n_fac + n_cli, 2))
    opening = rng.uniform(0.0, box_size, size=n_fac)
    D = squareform(pdist(points)) if len(points) > 1 else np.zeros((len(points), len(points)))

    rows, cols = np.triu_indices(n_cli, k=1)
    mask = rng.random(len(rows)) < edge_probability
    edges = set(zip(rows[mask].tolist(), cols[mask].tolist()))
    if ensure_perfect:
        perm = rng.permutation(n_cli)
        edges.update(norm_edge(int(perm[2 * t]), int(perm[2 * t + 1])) for t in range(n_cli // 2))

    return make_instance(opening=opening.tolist(), metric=D, edges=sorted(edges))


def generate_euclidean_ufl(n_fac: int, n_cli: int, box_size: float = 100.0, seed: int = 0) -> UflInstance:
    """Random Euclidean UFL instance (metric costs satisfy the three-hop inequality)"""
    if n_fac < 1 or n_cli < 0:
        raise PreconditionError("need n_fac >= 1 and n_cli >= 0")
    rng = np.random.default_rng(seed)
    fac = rng.uniform(0.0, box_size, size=(n_fac, 2))
    cli = rng.uniform(0.0, box_size, size=(n_cli, 2))
    opening = rng.uniform(0.0, box_size, size=n_fac)
    cost = np.linalg.norm(fac[:, None, :] - cli[None, :, :], axis=2)
    return UflInstance(
        facilities=[Facility(id=i, opening_cost=float(opening[i])) for i in range(n_fac)],
        clients=[Client(id=j) for j in range(n_cli)],
        assignment_cost=cost.tolist(),
    )


# ============= FIXTURES =============

def _line_metric(positions: Sequence[int]) -> List[List[int]]:
    return [[abs(a - b) for b in positions] for a in positions]


def _complete(n: int) -> List[Edge]:
    return [(j, k) for j in range(n) for k in range(j + 1, n)]


def fixture(name: str) -> FlmInstance:
    """
    Named hand-checkable instances

    gap-2fac: two free facilities 10 apart, three clients co-located with
        each, complete compatibility graph.
    colocated-unit: one facility with f=1 and four co-located, mutually
        compatible clients.
    triangle-3-2: unit equilateral triangle of compatible clients, one free
        facility at distance 1 from each.
    collinear-3: clients at 0, 1, 2 on a line, free facility at 0, pairs
        {v1,v2} and {v2,v3}.
    """
    if name == "gap-2fac":
        return make_instance(
            opening=[0, 0],
            metric=_line_metric([0, 10, 0, 0, 0, 10, 10, 10]),
            edges=_complete(6),
            facility_labels=["i1", "i2"],
            client_labels=["j1", "j2", "j3", "k1", "k2", "k3"],
        )
    if name == "colocated-unit":
        return make_instance(
            opening=[1],
            metric=[[0] * 5 for _ in range(5)],
            edges=_complete(4),
            facility_labels=["i"],
            client_labels=["v1", "v2", "v3", "v4"],
        )
    if name == "triangle-3-2":
        # regular tetrahedron: every pair at distance 1
        return make_instance(
            opening=[0],
            metric=[[0 if a == b else 1 for b in range(4)] for a in range(4)],
            edges=_complete(3),
            facility_labels=["i"],
            client_labels=["v1", "v2", "v3"],
        )
    if name == "collinear-3":
        return make_instance(
            opening=[0],
            metric=_line_metric([0, 0, 1, 2]),
            edges=[(0, 1), (1, 2)],
            facility_labels=["i"],
            client_labels=["v1", "v2", "v3"],
        )
    raise UnknownIdentifierError(f"unknown fixture '{name}' (known: {', '.join(FIXTURES)})")
