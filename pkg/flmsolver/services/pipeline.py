"""
Pipeline Service - End-to-end FLM approximation algorithms
main: LP -> min-cost maximum matching -> reroute -> meta-client UFL rounding
perfect-direct: LP -> client-level UFL rounding -> min-cost perfect matching
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from flmsolver.config import LEMMA_TOL, METRIC_TOL, MIN_LAMBDA, get_settings
from flmsolver.errors import PreconditionError
from flmsolver.models.fractional import UflFractional
from flmsolver.models.instance import FlmInstance, FlmSolution
from flmsolver.models.reports import PipelineConfig, PipelineReport, RerouteReport
from flmsolver.services import matching as mm
from flmsolver.services.instances import build_solution, edge_set_distances, validate_instance
from flmsolver.services.lp import FlmLpResult, flm_costs, project_to_ufl, solve_lp_flm
from flmsolver.services.reroute import reroute_general, reroute_perfect
from flmsolver.services.rounding import build_client_ufl, build_meta_client_ufl, round_bifactor
from flmsolver.utils.logger import log_lemma_check, logger

DEFAULT_LAMBDA: Dict[str, float] = {
    "general": 1.934,
    "perfect-reroute": 2.373,
    "perfect-direct": 2.218,
}


def default_lambda(mode: str) -> float:
    """λ minimizing the mode's guarantee"""
    try:
        return DEFAULT_LAMBDA[mode]
    except KeyError:
        raise PreconditionError(f"no default lambda for mode '{mode}'")


def guarantee_bound(mode: str, lam: float) -> float:
    """
    Approximation factor of a mode at λ

    general: max{2λ, 3(1 + 2/e^λ)}; perfect-reroute: max{λ, 2(1 + 2/e^λ)};
    perfect-direct: max{λ, 2 + 2/e^λ}
    """
    tail = 2.0 / math.exp(lam)
    if mode == "general":
        return max(2.0 * lam, 3.0 * (1.0 + tail))
    if mode == "perfect-reroute":
        return max(lam, 2.0 * (1.0 + tail))
    if mode == "perfect-direct":
        return max(lam, 2.0 + tail)
    raise PreconditionError(f"unknown mode '{mode}'")


def resolve_mode(inst: FlmInstance, mode: str) -> str:
    """auto -> perfect-direct on perfectly matchable graphs, general otherwise"""
    if mode != "auto":
        return mode
    return "perfect-direct" if mm.is_perfectly_matchable(inst.graph) else "general"


def trial_seeds(seed: int, trials: int) -> List[int]:
    """Trial 0 uses the seed itself; later trials derive theirs via SeedSequence"""
    return [seed] + [int(np.random.SeedSequence([seed, t]).generate_state(1)[0]) for t in range(1, trials)]


def _prepare(inst: FlmInstance, cfg: PipelineConfig, mode: str) -> float:
    if cfg.trials < 1:
        raise PreconditionError("trials must be at least 1")
    lam = cfg.lam if cfg.lam is not None else default_lambda(mode)
    if lam < MIN_LAMBDA:
        raise PreconditionError(f"lambda must be at least {MIN_LAMBDA}, got {lam}")
    violations = validate_instance(inst)
    if violations:
        raise PreconditionError(f"invalid instance: {violations[0]}" + (
            f" (+{len(violations) - 1} more)" if len(violations) > 1 else ""))
    return lam


def _run_trials(run: Callable[[int], Tuple[FlmSolution, Dict[str, float]]], seeds: List[int], jobs: int):
    if jobs > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(run, seeds))
    return [run(s) for s in seeds]


def _record(checks: Dict[str, float], name: str, slack: float) -> None:
    checks[name] = min(checks.get(name, math.inf), float(slack))
    log_lemma_check(name, slack)
    if slack < -LEMMA_TOL:
        logger.warning(f"Lemma Check FAILED | {name} | Slack: {slack:.3e}")


def _assemble(
    mode: str, lam: float, cfg: PipelineConfig, lp: FlmLpResult, inst: FlmInstance,
    results: List[Tuple[FlmSolution, Dict[str, float]]], seeds: List[int],
    reroute: Optional[RerouteReport], checks: Dict[str, float], timings: Dict[str, float],
) -> PipelineReport:
    lp_open, lp_conn = flm_costs(inst, lp.frac)
    costs = [sol.total_cost for sol, _ in results]
    best = int(np.argmin(costs))
    for _, trial_checks in results:
        for name, slack in trial_checks.items():
            _record(checks, name, slack)
    _record(checks, "cost_above_lp", min(costs) - lp.value)
    return PipelineReport(
        mode=mode, lam=lam, seed=seeds[best], solution=results[best][0], cost=costs[best],
        lp_value=lp.value, lp_open=lp_open, lp_conn=lp_conn, nu=lp.nu, cuts=lp.cuts,
        reroute=reroute, guarantee_bound=guarantee_bound(mode, lam), trials=cfg.trials,
        trial_costs=costs, trial_seeds=seeds, mean_cost=float(np.mean(costs)),
        checks=checks, timings=timings,
    )


def solve_flm_main(inst: FlmInstance, cfg: PipelineConfig, lp: Optional[FlmLpResult] = None) -> PipelineReport:
    """
    LP rounding through rerouting

    Solve LP_FLM, take a min-cost maximum matching M* under d(e) (a
    min-cost perfect matching in perfect-reroute mode), reroute the LP
    point onto M*, and round the meta-client UFL instance whose clients
    are the pairs of M*.

    Args:
        inst: Validated instance
        cfg: mode general or perfect-reroute, λ, seed, trials
        lp: Precomputed LP_FLM optimum to reuse

    Returns:
        PipelineReport with the best solution over the trials
    """
    mode = cfg.mode
    if mode not in ("general", "perfect-reroute"):
        raise PreconditionError(f"solve_flm_main runs general or perfect-reroute, not '{mode}'")
    lam = _prepare(inst, cfg, mode)
    g = inst.graph
    if mode == "perfect-reroute" and not mm.is_perfectly_matchable(g):
        raise PreconditionError("perfect-reroute needs a perfectly matchable compatibility graph")
    settings = get_settings()
    timings: Dict[str, float] = {}
    checks: Dict[str, float] = {}

    if lp is None:
        lp = solve_lp_flm(inst)
    timings["ms_lp"] = lp.seconds * 1000.0

    start = time.perf_counter()
    lengths = inst.edge_lengths
    if mode == "perfect-reroute":
        M_star = mm.min_cost_perfect_matching(g, lengths)
        rr = reroute_perfect(inst, lp.frac, M_star)
    else:
        M_star = mm.min_cost_maximum_matching(g, lengths)
        rr = reroute_general(inst, lp.frac, M_star)
    timings["ms_reroute"] = (time.perf_counter() - start) * 1000.0

    if settings.check_lemmas:
        _, lp_conn = flm_costs(inst, lp.frac)
        _record(checks, "matching_below_lp_conn", lp_conn - rr.matching_length)
        _record(checks, "reroute_open", -abs(rr.y_scale * rr.open_before - rr.open_after))
        conn_factor = 2.0 if mode == "general" else 1.0
        _record(checks, "reroute_conn", conn_factor * rr.conn_before + rr.matching_length - rr.conn_after)

    pairs = sorted(M_star)
    ufl = build_meta_client_ufl(inst, M_star)
    cols = [g.edge_index(e) for e in pairs]
    x_tilde = rr.output.x
    meta = UflFractional(x_tilde[:, cols] if cols else np.zeros((inst.n_facilities, 0)), rr.output.y.copy())

    def run(seed: int) -> Tuple[FlmSolution, Dict[str, float]]:
        rounded = round_bifactor(ufl, meta, lam, seed, deterministic=cfg.deterministic)
        sol = build_solution(inst, rounded.open_set, pairs, rounded.assignment)
        return sol, {}

    seeds = trial_seeds(cfg.seed, cfg.trials)
    start = time.perf_counter()
    results = _run_trials(run, seeds, cfg.jobs or settings.jobs)
    timings["ms_round"] = (time.perf_counter() - start) * 1000.0
    return _assemble(mode, lam, cfg, lp, inst, results, seeds, rr, checks, timings)


def solve_flm_perfect(inst: FlmInstance, cfg: PipelineConfig, lp: Optional[FlmLpResult] = None) -> PipelineReport:
    """
    Direct rounding for perfectly matchable compatibility graphs

    Solve LP_FLM, project it to LP_UFL on the clients, round to a facility
    set S, then take a min-cost perfect matching under d(S, e) and send
    every pair to its nearest facility of S.
    """
    mode = "perfect-direct"
    lam = _prepare(inst, cfg, mode)
    g = inst.graph
    if not mm.is_perfectly_matchable(g):
        raise PreconditionError("perfect-direct needs a perfectly matchable compatibility graph")
    settings = get_settings()
    timings: Dict[str, float] = {}
    checks: Dict[str, float] = {}

    if lp is None:
        lp = solve_lp_flm(inst)
    timings["ms_lp"] = lp.seconds * 1000.0

    ufl = build_client_ufl(inst)
    projected = project_to_ufl(inst, lp.frac)
    x_edge = lp.frac.x_edge
    lengths = inst.edge_lengths
    edge_array = g.edge_array()

    def run(seed: int) -> Tuple[FlmSolution, Dict[str, float]]:
        rounded = round_bifactor(ufl, projected, lam, seed, deterministic=cfg.deterministic)
        S = rounded.open_set
        trial_checks: Dict[str, float] = {}
        if not g.n_edges:
            return build_solution(inst, S, [], []), trial_checks
        dist_S, argmin_S = edge_set_distances(inst, S)
        M_S = mm.min_cost_perfect_matching(g, dist_S)
        pairs = sorted(M_S)
        sigma = [int(argmin_S[g.edge_index(e)]) for e in pairs]
        sol = build_solution(inst, S, pairs, sigma)
        if settings.check_lemmas:
            client_S = inst.client_dist[S].min(axis=0)
            bound = lengths + client_S[edge_array[:, 0]] + client_S[edge_array[:, 1]]
            trial_checks["set_distance_triangle"] = float((bound - dist_S).min()) + METRIC_TOL
            trial_checks["assignment_below_fractional"] = float(dist_S @ x_edge) - sol.connection_cost_total
        return sol, trial_checks

    seeds = trial_seeds(cfg.seed, cfg.trials)
    start = time.perf_counter()
    results = _run_trials(run, seeds, cfg.jobs or settings.jobs)
    timings["ms_round"] = (time.perf_counter() - start) * 1000.0
    return _assemble(mode, lam, cfg, lp, inst, results, seeds, None, checks, timings)


def solve(inst: FlmInstance, cfg: PipelineConfig, lp: Optional[FlmLpResult] = None) -> PipelineReport:
    """Resolve auto and dispatch to the matching pipeline"""
    mode = resolve_mode(inst, cfg.mode)
    cfg = cfg.model_copy(update={"mode": mode})
    logger.info(f"Pipeline | Mode: {mode} | Seed: {cfg.seed} | Trials: {cfg.trials}")
    if mode == "perfect-direct":
        return solve_flm_perfect(inst, cfg, lp)
    return solve_flm_main(inst, cfg, lp)
