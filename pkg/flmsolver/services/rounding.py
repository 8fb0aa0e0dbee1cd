"""
Rounding Service - Bifactor LP rounding for UFL
Scale the opening variables by λ, cluster clients on disjoint close
neighbourhoods, open one close facility per cluster center and every other
fractional copy independently, then connect each client to its nearest
open facility.
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from flmsolver.config import FEAS_TOL, METRIC_TOL, MIN_LAMBDA
from flmsolver.errors import FeasibilityError, PreconditionError
from flmsolver.models.fractional import UflFractional
from flmsolver.models.graph import Matching
from flmsolver.models.instance import Client, Facility, FlmInstance, UflInstance, UflSolution
from flmsolver.utils.logger import log_rounding

MAX_REPORTED = 20


# ============= UFL INSTANCES =============

def validate_three_hop(ufl: UflInstance) -> List[str]:
    """
    Check d(i,j) <= d(i,j') + d(i',j') + d(i',j) for all i, i', j, j'

    Returns:
        Violations naming a witnessing quadruple (empty when valid)
    """
    D = ufl.cost
    if D.size == 0:
        return []
    # T[i, i'] = min_j' d(i,j') + d(i',j');  R[i, j] = min_i' T[i,i'] + d(i',j)
    T = (D[:, None, :] + D[None, :, :]).min(axis=2)
    R3 = T[:, :, None] + D[None, :, :]
    R = R3.min(axis=1)
    violations = []
    for i, j in np.argwhere(D > R + METRIC_TOL)[:MAX_REPORTED]:
        i2 = int(np.argmin(R3[i, :, j]))
        j2 = int(np.argmin(D[i] + D[i2]))
        violations.append(
            f"three-hop violated: d({i},{j})={D[i, j]} > d({i},{j2})+d({i2},{j2})+d({i2},{j})={R[i, j]}"
        )
    return violations


def build_meta_client_ufl(inst: FlmInstance, M: Matching) -> UflInstance:
    """
    UFL instance whose clients are the pairs of M (sorted), with
    d'(i, e) = d(i, e)
    """
    g = inst.graph
    pairs = sorted(M)
    positions = [g.edge_index(e) for e in pairs]
    cost = inst.pair_dist[:, positions] if positions else np.zeros((inst.n_facilities, 0))
    return UflInstance(
        facilities=list(inst.facilities),
        clients=[Client(id=t, label=f"{j}-{k}") for t, (j, k) in enumerate(pairs)],
        assignment_cost=cost.tolist(),
    )


def build_client_ufl(inst: FlmInstance) -> UflInstance:
    """UFL instance (F, V, f, d) on the same facilities and clients"""
    return UflInstance(
        facilities=list(inst.facilities),
        clients=list(inst.clients),
        assignment_cost=inst.client_dist.tolist(),
    )


# ============= ROUNDING =============

def check_ufl_fractional(ufl: UflInstance, frac: UflFractional, tol: float = FEAS_TOL) -> List[str]:
    """LP_UFL feasibility: Σ_i x_ij = 1, 0 <= x_ij <= y_i"""
    nf, nc = ufl.n_facilities, ufl.n_clients
    if frac.x.shape != (nf, nc) or frac.y.shape != (nf,):
        return [f"shape mismatch: x {frac.x.shape}, y {frac.y.shape}"]
    violations = []
    for j in np.flatnonzero(np.abs(frac.x.sum(axis=0) - 1.0) > tol * max(1, nf)):
        violations.append(f"client {j} assigned {frac.x[:, j].sum():.9g} != 1")
    for i, j in np.argwhere(frac.x > frac.y[:, None] + tol)[:MAX_REPORTED]:
        violations.append(f"x[{i},{j}]={frac.x[i, j]:.9g} exceeds y[{i}]={frac.y[i]:.9g}")
    if np.any(frac.x < -tol) or np.any(frac.y < -tol):
        violations.append("negative LP_UFL value")
    return violations


@dataclass
class CloseSets:
    """
    Scaled volumes and clustering of a UFL point

    close[j, i] is the volume of facility i in client j's close
    neighbourhood (rows sum to 1); centers are in clustering order and
    center_of[j] is the center whose neighbourhood meets j's.
    """
    y_bar: np.ndarray
    close: np.ndarray
    avg_dist: np.ndarray
    centers: List[int]
    center_of: List[int]


def close_sets(ufl: UflInstance, frac: UflFractional, lam: float) -> CloseSets:
    """Scale by λ, cut close neighbourhoods of volume 1 and cluster the clients"""
    D = ufl.cost
    nf, nc = ufl.n_facilities, ufl.n_clients
    y_bar = np.minimum(1.0, lam * np.maximum(frac.y, 0.0))
    avail = np.minimum(lam * np.maximum(frac.x, 0.0), y_bar[:, None])

    close = np.zeros((nc, nf))
    for j in range(nc):
        need = 1.0
        for i in sorted(range(nf), key=lambda i: (D[i, j], i)):
            if need <= 0.0:
                break
            take = min(avail[i, j], need)
            if take > 0.0:
                close[j, i] = take
                need -= take
        if close[j].sum() > 0:
            close[j] /= close[j].sum()
    avg = (close * D.T).sum(axis=1) if nc else np.zeros(0)

    centers: List[int] = []
    center_of = [-1] * nc
    owner = np.full(nf, -1)
    for j in sorted(range(nc), key=lambda j: (avg[j], j)):
        members = np.flatnonzero(close[j] > 0.0)
        claimed = owner[members]
        if np.all(claimed < 0):
            owner[members] = j
            centers.append(j)
            center_of[j] = j
        else:
            center_of[j] = int(claimed[claimed >= 0][0])
    return CloseSets(y_bar, close, avg, centers, center_of)


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=key)))


def _assign(ufl: UflInstance, open_set: Sequence[int], center_of: List[int]) -> UflSolution:
    D = ufl.cost
    opened = sorted(set(int(i) for i in open_set))
    if ufl.n_clients and opened:
        sub = D[opened]
        assignment = [opened[int(p)] for p in np.argmin(sub, axis=0)]
        connection = float(sub.min(axis=0).sum())
    else:
        assignment, connection = [], 0.0
    opening = float(sum(ufl.opening[i] for i in opened))
    return UflSolution(
        open_set=opened, assignment=assignment, center=center_of,
        opening_cost_total=opening, connection_cost_total=connection,
    )


def round_bifactor(
    ufl: UflInstance,
    frac: UflFractional,
    lam: float,
    seed: int = 0,
    deterministic: bool = False,
) -> UflSolution:
    """
    Randomized (λ, 1 + 2/e^λ) bifactor rounding

    Args:
        ufl: UFL instance satisfying the three-hop inequality
        frac: Feasible LP_UFL point
        lam: Scaling parameter, at least 1.678
        seed: RNG seed; one stream per cluster center and per facility
        deterministic: Open every facility with λy >= 1/2 plus each center's
            nearest close facility (reproducible, no guarantee)

    Returns:
        UflSolution with every client at its nearest open facility

    Raises:
        PreconditionError: λ below 1.678
        FeasibilityError: frac violates LP_UFL
    """
    if lam < MIN_LAMBDA:
        raise PreconditionError(f"lambda must be at least {MIN_LAMBDA}, got {lam}")
    violations = check_ufl_fractional(ufl, frac)
    if violations:
        raise FeasibilityError(violations)

    cs = close_sets(ufl, frac, lam)
    D = ufl.cost
    nf = ufl.n_facilities
    certain = cs.y_bar >= 1.0 - FEAS_TOL
    opened = set(np.flatnonzero(certain).tolist())

    if deterministic:
        opened |= set(np.flatnonzero(cs.y_bar >= 0.5).tolist())
        for c in cs.centers:
            members = np.flatnonzero(cs.close[c] > 0.0)
            opened.add(int(min(members, key=lambda i: (D[i, c], i))))
        sol = _assign(ufl, opened, cs.center_of)
        log_rounding(lam, seed, sol.total_cost, deterministic=True)
        return sol

    claimed = np.zeros(nf)
    for c in cs.centers:
        members = np.flatnonzero(cs.close[c] > 0.0)
        claimed[members] = cs.close[c, members]
        # certain members stay in the draw; picking one only repeats an opening
        p = cs.close[c, members] / cs.close[c, members].sum()
        opened.add(int(members[_stream(seed, 0, c).choice(len(members), p=p)]))

    remainder = np.clip(cs.y_bar - claimed, 0.0, 1.0)
    for i in range(nf):
        if not certain[i] and remainder[i] > 0.0 and _stream(seed, 1, i).random() < remainder[i]:
            opened.add(i)

    sol = _assign(ufl, opened, cs.center_of)
    log_rounding(lam, seed, sol.total_cost)
    return sol
