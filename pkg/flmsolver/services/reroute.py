"""
Reroute Service - Move an LP_FLM solution onto a fixed maximum matching
general: mass on each M'-edge moves to the next M-edge of the alternating
component, y doubles. perfect: mass splits in half between the two
neighbouring M-edges of the alternating cycle, y is unchanged.
"""

import json
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

import numpy as np

from flmsolver.config import FEAS_TOL, GAMMA_DROP, LEMMA_TOL, ZERO_TOL
from flmsolver.errors import FeasibilityError, InvariantError, PreconditionError
from flmsolver.models.fractional import FractionalFlm, FractionalMatching
from flmsolver.models.graph import Graph, Matching
from flmsolver.models.instance import FlmInstance
from flmsolver.models.reports import RerouteReport, RerouteStep
from flmsolver.services import matching as mm
from flmsolver.services.lp import check_lp_flm_feasible, flm_costs
from flmsolver.utils.logger import log_reroute, logger

RerouteMode = Literal["general", "perfect"]


def potential(graph: Graph, x_tilde: np.ndarray, gamma: Dict[Matching, float], M: Matching) -> int:
    """
    Φ = (|E|+1)·#{(i, e') : e' ∉ M, x̃_{i,e'} > 1e-9} + Σ_{γ_{M'} > 0} |M' ∖ M|
    """
    off = np.array([e not in M for e in graph.edges], dtype=bool)
    served = int(np.count_nonzero(x_tilde[:, off] > ZERO_TOL)) if x_tilde.size else 0
    return (graph.n_edges + 1) * served + sum(len(m - M) for m, g in gamma.items() if g > 0)


def _sorted_key(m: Matching):
    return sorted(m)


def _state(x: np.ndarray, gamma: Dict[Matching, float], M: Matching) -> dict:
    return {
        "x_tilde": x.tolist(),
        "gamma": [[sorted(m), g] for m, g in gamma.items()],
        "matching": sorted(M),
    }


def sweep_off_matching(inst: FlmInstance, x: np.ndarray, M: Matching) -> float:
    """
    Move numerical leftovers off M onto the cheapest adjacent M-edge, in place

    Args:
        inst: Instance
        x: Edge-indexed assignment (facilities × edges)
        M: Matching the point is being moved onto

    Returns:
        Total mass moved

    Raises:
        InvariantError: more than LEMMA_TOL·|E| would move, or an off-M
            edge touches no edge of M
    """
    g = inst.graph
    in_m = np.array([e in M for e in g.edges], dtype=bool)
    leftover = x[:, ~in_m] if x.size else np.zeros((0, 0))
    swept = float(leftover[leftover > 0.0].sum())
    limit = LEMMA_TOL * max(1, g.n_edges)
    if swept > limit:
        raise InvariantError(
            f"{swept:.3g} mass left off M after rerouting (limit {limit:.3g})",
            {"x_tilde": x.tolist(), "matching": sorted(M)},
        )
    m_positions = np.flatnonzero(in_m)
    for i, col in np.argwhere((x > 0.0) & ~in_m[None, :]):
        u, v = g.edges[col]
        adjacent = [p for p in m_positions if set(g.edges[p]) & {u, v}]
        if not adjacent:
            raise InvariantError(f"edge {g.edges[col]} touches no edge of M", {"matching": sorted(M)})
        target = min(adjacent, key=lambda p: (inst.pair_dist[i, p], p))
        x[i, target] += x[i, col]
        x[i, col] = 0.0
    if swept > 0.0:
        logger.debug(f"Reroute | Swept {swept:.3g} leftover mass onto M")
    return swept


def _reroute(
    inst: FlmInstance,
    frac: FractionalFlm,
    M: Matching,
    mode: RerouteMode,
    check_steps: bool = False,
) -> RerouteReport:
    g = inst.graph
    x = np.where(frac.x <= ZERO_TOL, 0.0, frac.x).astype(float)
    y_scale = 2.0 if mode == "general" else 1.0
    y_out = y_scale * frac.y

    gamma = mm.decompose_to_maximum_matchings(g, FractionalMatching(x.sum(axis=0))).as_gamma()
    phi0 = phi = potential(g, x, gamma, M)
    steps: List[RerouteStep] = []
    transfer = 0.0
    iteration = 0

    while any(m != M for m in gamma):
        iteration += 1
        M_prime = min((m for m in gamma if m != M), key=_sorted_key)
        g_prime = gamma[M_prime]
        components = mm.symmetric_difference_components(M, M_prime)
        if not components:
            raise InvariantError("M' differs from M but M △ M' is empty", _state(x, gamma, M))
        P = components[0]
        if P.edges[0] not in M_prime or len(P.edges) % 2:
            raise InvariantError(f"component {P.edges} does not alternate evenly from M'", _state(x, gamma, M))
        if mode == "perfect" and P.kind != "cycle":
            raise InvariantError(f"perfect matchings produced a path {P.edges}", _state(x, gamma, M))

        positions = [g.edge_index(e) for e in P.edges]
        moves = []
        for t in range(0, len(positions), 2):
            col = positions[t]
            i = int(np.argmax(x[:, col]))
            moves.append((t, i, col))
        eps = min([g_prime] + [x[i, col] for _, i, col in moves])

        if eps <= ZERO_TOL:
            log = logger.warning if eps <= 0.0 else logger.debug
            log(f"Reroute | Iteration {iteration} | no mass on M'-edges of {P.edges}, shifting γ only")
            eps = g_prime
            kind = "shift"
        else:
            kind = P.kind
            L = len(positions)
            for t, i, col in moves:
                amount = x[i, col] if x[i, col] - eps <= ZERO_TOL else eps
                x[i, col] -= amount
                if x[i, col] <= ZERO_TOL:
                    x[i, col] = 0.0
                nxt = positions[(t + 1) % L]
                if mode == "general":
                    x[i, nxt] += amount
                else:
                    prv = positions[(t - 1) % L]
                    x[i, nxt] += amount / 2.0
                    x[i, prv] += amount / 2.0
                transfer += amount

        M_next = (M_prime - set(P.edges)) | (set(P.edges) - M_prime)
        M_next = frozenset(M_next)
        gamma[M_prime] = g_prime - eps
        gamma[M_next] = gamma.get(M_next, 0.0) + eps
        gamma = {m: c for m, c in gamma.items() if c >= GAMMA_DROP}

        new_phi = potential(g, x, gamma, M)
        if new_phi >= phi:
            raise InvariantError(f"potential did not decrease ({phi} -> {new_phi})", _state(x, gamma, M))
        phi = new_phi
        steps.append(RerouteStep(iteration=iteration, epsilon=float(eps), kind=kind, size=len(P.edges), potential=phi))

        if check_steps:
            violations = check_lp_flm_feasible(
                inst, FractionalFlm(x, y_out, frac.edges, frac.n_clients), tol=FEAS_TOL * 10
            )
            if mode == "perfect":
                violations = [v for v in violations if not v.startswith("flow")]
            if violations:
                raise InvariantError(f"iteration {iteration} left LP_FLM: {violations[0]}", _state(x, gamma, M))

    swept = sweep_off_matching(inst, x, M)
    in_m = np.array([e in M for e in g.edges], dtype=bool)

    out = FractionalFlm(x, y_out, frac.edges, frac.n_clients)
    open_before, conn_before = flm_costs(inst, frac)
    open_after, conn_after = flm_costs(inst, out)
    lengths = inst.edge_lengths
    final_phi = potential(g, x, {M: 1.0}, M)
    log_reroute(mode, iteration, phi0, final_phi)
    return RerouteReport(
        mode=mode,
        iterations=iteration,
        initial_potential=phi0,
        final_potential=final_phi,
        transfer_total=transfer,
        y_scale=y_scale,
        open_before=open_before,
        open_after=open_after,
        conn_before=conn_before,
        conn_after=conn_after,
        matching_length=float(lengths[in_m].sum()) if len(lengths) else 0.0,
        swept_mass=swept,
        steps=steps,
        output=out,
    )


def _check_inputs(inst: FlmInstance, frac: FractionalFlm, M: Matching) -> None:
    g = inst.graph
    for e in M:
        if not g.has_edge(*e):
            raise PreconditionError(f"edge {e} of M is not a compatible pair")
    if not g.is_matching(M):
        raise PreconditionError("M is not a matching")
    violations = check_lp_flm_feasible(inst, frac)
    if violations:
        raise FeasibilityError(violations)


def reroute_general(inst: FlmInstance, frac: FractionalFlm, M: Matching, check_steps: bool = False) -> RerouteReport:
    """
    Reroute onto a maximum matching M

    Returns (x̃, 2y) on the report's `output`: x̃ is supported on M,
    open doubles and conn_FLM(x̃) <= 2·conn_FLM(x) + Σ_{e∈M} d(e).

    Args:
        inst: Instance
        frac: Feasible LP_FLM point
        M: Maximum matching of the compatibility graph
        check_steps: Re-check LP_FLM feasibility of (x̃, 2y) after every iteration

    Raises:
        PreconditionError: M not a maximum matching
        InvariantError: potential failed to decrease (state attached)
    """
    M = frozenset(M)
    _check_inputs(inst, frac, M)
    if len(M) != mm.nu(inst.graph):
        raise PreconditionError(f"M has {len(M)} edges, a maximum matching has {mm.nu(inst.graph)}")
    return _reroute(inst, frac, M, "general", check_steps)


def reroute_perfect(inst: FlmInstance, frac: FractionalFlm, M: Matching, check_steps: bool = False) -> RerouteReport:
    """
    Reroute onto a perfect matching M, splitting each move in half

    Returns (x̃, y): x̃ is supported on M, open is unchanged and
    conn_FLM(x̃) <= conn_FLM(x) + Σ_{e∈M} d(e). Flow feasibility of the
    intermediate points is not maintained, only of the final one.
    """
    M = frozenset(M)
    _check_inputs(inst, frac, M)
    if 2 * len(M) != inst.n_clients:
        raise PreconditionError(f"M covers {2 * len(M)} of {inst.n_clients} clients, not perfect")
    return _reroute(inst, frac, M, "perfect", check_steps)


def write_trace(report: RerouteReport, path: Union[str, Path]) -> None:
    """Write the per-iteration trace as JSON lines"""
    with open(path, "w", encoding="utf-8") as fh:
        for step in report.steps:
            fh.write(json.dumps(step.model_dump()) + "\n")


def trace_lines(report: RerouteReport) -> List[str]:
    """
    Per-iteration trace as JSON strings

    Args:
        report: Reroute report whose steps are rendered

    Returns:
        One JSON object per iteration, in order
    """
    return [json.dumps(step.model_dump()) for step in report.steps]


def reroute(inst: FlmInstance, frac: FractionalFlm, M: Matching, mode: Optional[RerouteMode] = None) -> RerouteReport:
    """Dispatch on mode (perfect when M is perfect and mode is None)"""
    if mode is None:
        mode = "perfect" if 2 * len(M) == inst.n_clients else "general"
    return reroute_perfect(inst, frac, M) if mode == "perfect" else reroute_general(inst, frac, M)
