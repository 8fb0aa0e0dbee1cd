"""
Oracle Test Suite
Exact FLM and UFL solvers, matching enumeration and integrality gaps
"""

import numpy as np
import pytest

from conftest import cycle_edges, zero_metric
from flmsolver.config import reload_settings
from flmsolver.errors import CapabilityError
from flmsolver.models.graph import Graph
from flmsolver.models.instance import Client, Facility, UflInstance
from flmsolver.models.reports import PipelineConfig
from flmsolver.services.instances import (
    check_solution, edge_set_distances, fixture, generate_euclidean, generate_euclidean_ufl, make_instance,
    reduce_ufl_to_flm,
)
from flmsolver.services.oracle import brute_force_matchings, exact_solve, exact_solve_ufl, integrality_gap
from flmsolver.services.pipeline import solve


# ============= EXACT FLM TESTS =============

def test_exact_gap_fixture():
    """One pair must cross the two clusters: optimum 10"""
    result = exact_solve(fixture("gap-2fac"))
    assert result.optimum == pytest.approx(10.0)
    assert len(result.optimal_solution.matching) == 3
    assert result.facility_subsets_evaluated == 3


def test_exact_colocated_unit():
    result = exact_solve(fixture("colocated-unit"))
    assert result.optimum == pytest.approx(1.0)
    assert result.optimal_solution.open_set == [0]


def test_exact_without_pairs():
    inst = make_instance(opening=[3, 4], metric=zero_metric(5), edges=[])
    result = exact_solve(inst)
    assert result.optimum == 0.0
    assert result.optimal_solution.open_set == []
    assert result.optimal_solution.matching == []


def test_exact_solutions_are_feasible():
    for seed in range(8):
        inst = generate_euclidean(3, 6, 0.5, seed=seed)
        sol = exact_solve(inst).optimal_solution
        assert check_solution(inst, sol) == []


def test_exact_below_pipeline():
    """No pipeline run beats the exact optimum"""
    for seed in range(6):
        inst = generate_euclidean(3, 6, 0.4, seed=seed, ensure_perfect=True)
        optimum = exact_solve(inst).optimum
        for mode in ("general", "perfect-direct"):
            assert solve(inst, PipelineConfig(mode=mode, seed=seed)).cost >= optimum - 1e-6


def test_exact_facility_cap():
    inst = make_instance(opening=[0] * 17, metric=zero_metric(19), edges=[(0, 1)])
    with pytest.raises(CapabilityError):
        exact_solve(inst)


def test_exact_cap_follows_settings(monkeypatch):
    monkeypatch.setenv("FLM_ORACLE_FACILITY_CAP", "2")
    reload_settings()
    assert exact_solve(fixture("gap-2fac")).optimum == pytest.approx(10.0)
    inst = make_instance(opening=[0] * 3, metric=zero_metric(5), edges=[(0, 1)])
    with pytest.raises(CapabilityError):
        exact_solve(inst)


def _exchange_check(inst) -> None:
    """Optimum equals the subset × maximum-matching enumeration; no matching beats the optimal one under d(S, ·)"""
    g = inst.graph
    result = exact_solve(inst)
    candidates = brute_force_matchings(g)
    if not candidates[0]:
        assert result.optimum == 0.0
        return

    S = result.optimal_solution.open_set
    dist_S, _ = edge_set_distances(inst, S)
    inner = sum(dist_S[g.edge_index(e)] for e in result.optimal_solution.matching)
    for M in candidates:
        assert sum(dist_S[g.edge_index(e)] for e in M) >= inner - 1e-9

    best = np.inf
    for mask in range(1, 1 << inst.n_facilities):
        T = [i for i in range(inst.n_facilities) if (mask >> i) & 1]
        dist_T, _ = edge_set_distances(inst, T)
        opening = float(inst.opening[T].sum())
        best = min(best, opening + min(sum(dist_T[g.edge_index(e)] for e in M) for M in candidates))
    assert result.optimum == pytest.approx(best, rel=1e-9, abs=1e-9)


def test_exact_exchange_check():
    for seed in range(25):
        _exchange_check(generate_euclidean(3, 6, 0.5, seed=seed))


@pytest.mark.slow
def test_exact_exchange_check_wide():
    rng = np.random.default_rng(17)
    for seed in range(100):
        nf, nc = int(rng.integers(1, 5)), int(rng.integers(2, 9))
        _exchange_check(generate_euclidean(nf, nc, 0.5, seed=seed))


# ============= MATCHING ENUMERATION TESTS =============

def test_brute_force_matchings_counts():
    """Triangle -> 3, 4-cycle -> 2, K4 -> 3"""
    assert len(brute_force_matchings(Graph(3, ((0, 1), (1, 2), (0, 2))))) == 3
    assert len(brute_force_matchings(Graph(4, tuple(cycle_edges(4))))) == 2
    k4 = Graph(4, tuple((u, v) for u in range(4) for v in range(u + 1, 4)))
    best = brute_force_matchings(k4)
    assert len(best) == 3
    assert all(len(m) == 2 for m in best)


def test_brute_force_matchings_empty_graph():
    assert brute_force_matchings(Graph(3, ())) == [frozenset()]


def test_brute_force_vertex_cap():
    with pytest.raises(CapabilityError):
        brute_force_matchings(Graph(13, ((0, 1),)))


# ============= INTEGRALITY GAP TESTS =============

def test_gap_fixtures():
    """gap-2fac is tight; colocated-unit is tight under full, 3 under weak-flow"""
    assert integrality_gap(fixture("gap-2fac")) == pytest.approx(1.0, abs=1e-6)
    colocated = fixture("colocated-unit")
    assert integrality_gap(colocated) == pytest.approx(1.0, abs=1e-6)
    assert integrality_gap(colocated, relaxation="weak-flow") == pytest.approx(3.0, abs=1e-5)


def test_gap_without_pairs_is_one():
    inst = make_instance(opening=[2], metric=zero_metric(3), edges=[])
    assert integrality_gap(inst) == 1.0


def test_gap_random_instances_within_bound():
    for seed in range(6):
        gap = integrality_gap(generate_euclidean(3, 6, 0.5, seed=seed))
        assert 1.0 - 1e-6 <= gap <= 3.868 + 1e-6


@pytest.mark.slow
def test_gap_random_instances_within_bound_wide():
    for seed in range(40):
        inst = generate_euclidean(4, 8, 0.4, seed=seed)
        assert integrality_gap(inst) <= 3.868 + 1e-6


# ============= EXACT UFL TESTS =============

def test_exact_ufl_single_pair():
    ufl = UflInstance(facilities=[Facility(id=0, opening_cost=2)], clients=[Client(id=0)], assignment_cost=[[5]])
    cost, open_set = exact_solve_ufl(ufl)
    assert cost == pytest.approx(7.0)
    assert open_set == [0]


def test_exact_ufl_without_clients():
    ufl = UflInstance(facilities=[Facility(id=0, opening_cost=2)], clients=[], assignment_cost=[[]])
    assert exact_solve_ufl(ufl) == (0.0, [])


def test_reduction_doubles_the_ufl_optimum():
    """Each client is paired with a free copy, so every cost doubles"""
    for seed in range(5):
        ufl = generate_euclidean_ufl(3, 4, seed=seed)
        ufl_opt, _ = exact_solve_ufl(ufl)
        assert exact_solve(reduce_ufl_to_flm(ufl)).optimum == pytest.approx(2 * ufl_opt, rel=1e-9)


def test_exact_ufl_cap():
    ufl = UflInstance(
        facilities=[Facility(id=i, opening_cost=1) for i in range(17)],
        clients=[Client(id=0)],
        assignment_cost=np.ones((17, 1)).tolist(),
    )
    with pytest.raises(CapabilityError):
        exact_solve_ufl(ufl)


# ============= RUN TESTS =============

if __name__ == "__main__":
    pytest.main([__file__, "-v"])
