"""
Rounding Test Suite
Three-hop validation, meta-client construction and bifactor UFL rounding
"""

import math

import numpy as np
import pytest

from flmsolver.errors import FeasibilityError, PreconditionError
from flmsolver.models.fractional import UflFractional
from flmsolver.models.instance import Client, Facility, UflInstance
from flmsolver.services import matching as mm
from flmsolver.services.instances import fixture, generate_euclidean, generate_euclidean_ufl
from flmsolver.services.lp import solve_lp_ufl, ufl_costs
from flmsolver.services.rounding import (
    build_client_ufl, build_meta_client_ufl, check_ufl_fractional, close_sets, round_bifactor,
    validate_three_hop,
)


def _ufl(opening, cost) -> UflInstance:
    return UflInstance(
        facilities=[Facility(id=i, opening_cost=f) for i, f in enumerate(opening)],
        clients=[Client(id=j) for j in range(len(cost[0]))],
        assignment_cost=cost,
    )


# ============= THREE-HOP TESTS =============

def test_three_hop_metric_instances():
    """Costs restricted from a metric satisfy the three-hop inequality"""
    for seed in range(5):
        assert validate_three_hop(build_client_ufl(generate_euclidean(3, 6, 0.5, seed=seed))) == []
        assert validate_three_hop(generate_euclidean_ufl(3, 5, seed=seed)) == []


def test_three_hop_violation():
    """d(i,j) = 10 with every other entry 0"""
    ufl = _ufl([0, 0], [[10, 0], [0, 0]])
    violations = validate_three_hop(ufl)
    assert len(violations) == 1
    assert "d(0,0)=10" in violations[0]


def test_meta_client_instances_satisfy_three_hop():
    for seed in range(8):
        inst = generate_euclidean(3, 8, 0.5, seed=seed)
        M = mm.min_cost_maximum_matching(inst.graph, inst.edge_lengths)
        assert validate_three_hop(build_meta_client_ufl(inst, M)) == []


# ============= META-CLIENT TESTS =============

def test_meta_client_empty_matching():
    ufl = build_meta_client_ufl(fixture("gap-2fac"), frozenset())
    assert ufl.n_clients == 0


def test_meta_client_costs():
    """d'(i, e) = d(i, j) + d(i, k) on the collinear fixture"""
    inst = fixture("collinear-3")
    ufl = build_meta_client_ufl(inst, frozenset({(1, 2)}))
    assert ufl.cost[0, 0] == pytest.approx(3.0)
    ufl = build_meta_client_ufl(inst, frozenset({(0, 1)}))
    assert ufl.cost[0, 0] == pytest.approx(1.0)
    assert ufl.clients[0].label == "0-1"


# ============= ROUNDING TESTS =============

def test_round_integral_point_is_returned():
    """0/1 x and y: scaling caps at 1, nothing random remains"""
    ufl = _ufl([3, 4, 5], [[1, 9, 9], [9, 1, 9], [9, 9, 1]])
    x = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
    frac = UflFractional(x, np.array([1.0, 1.0, 0.0]))
    for seed in range(10):
        sol = round_bifactor(ufl, frac, 1.934, seed)
        assert sol.open_set == [0, 1]
        assert sol.assignment == [0, 1, 0]


def test_round_single_pair():
    """f = 2, d = 5, λ = 2 -> cost 7 for every seed"""
    ufl = _ufl([2], [[5]])
    frac = UflFractional(np.ones((1, 1)), np.ones(1))
    for seed in range(5):
        assert round_bifactor(ufl, frac, 2.0, seed).total_cost == pytest.approx(7.0)


def test_round_is_deterministic_per_seed():
    ufl = generate_euclidean_ufl(5, 8, seed=2)
    frac, _ = solve_lp_ufl(ufl)
    a = round_bifactor(ufl, frac, 1.934, seed=13)
    b = round_bifactor(ufl, frac, 1.934, seed=13)
    assert a == b


def test_round_assigns_nearest_open_facility():
    for seed in range(5):
        ufl = generate_euclidean_ufl(4, 7, seed=seed)
        frac, _ = solve_lp_ufl(ufl)
        sol = round_bifactor(ufl, frac, 1.934, seed)
        assert sol.open_set
        for j, i in enumerate(sol.assignment):
            assert ufl.cost[i, j] == pytest.approx(ufl.cost[sol.open_set, j].min())


def test_round_samples_center_next_to_certain_facility():
    """Far facility certain after scaling, near one still opens with its close volume"""
    ufl = _ufl([0, 0], [[10], [0]])
    frac = UflFractional(np.array([[0.6], [0.4]]), np.array([0.6, 0.4]))
    lam = 2.0
    bound = (1 + 2 / math.exp(lam)) * 6.0
    sols = [round_bifactor(ufl, frac, lam, seed) for seed in range(500)]
    near_opened = sum(1 in sol.open_set for sol in sols)
    assert 300 < near_opened < 500
    assert np.mean([sol.total_cost for sol in sols]) < bound


def test_round_deterministic_mode():
    ufl = generate_euclidean_ufl(4, 6, seed=4)
    frac, _ = solve_lp_ufl(ufl)
    sols = {round_bifactor(ufl, frac, 1.934, seed, deterministic=True).model_dump_json() for seed in range(4)}
    assert len(sols) == 1


def test_round_rejects_bad_input():
    ufl = _ufl([2], [[5]])
    with pytest.raises(PreconditionError):
        round_bifactor(ufl, UflFractional(np.ones((1, 1)), np.ones(1)), 1.5)
    with pytest.raises(FeasibilityError):
        round_bifactor(ufl, UflFractional(np.full((1, 1), 0.5), np.ones(1)), 2.0)


def test_check_ufl_fractional_flags_open_violation():
    ufl = _ufl([1, 1], [[1], [2]])
    frac = UflFractional(np.array([[1.0], [0.0]]), np.array([0.5, 0.0]))
    assert any("exceeds" in v for v in check_ufl_fractional(ufl, frac))


def test_close_sets_have_unit_volume_and_disjoint_centers():
    ufl = generate_euclidean_ufl(5, 8, seed=6)
    frac, _ = solve_lp_ufl(ufl)
    cs = close_sets(ufl, frac, 1.934)
    assert np.allclose(cs.close.sum(axis=1), 1.0)
    owners = [set(np.flatnonzero(cs.close[c] > 0)) for c in cs.centers]
    for a in range(len(owners)):
        for b in range(a + 1, len(owners)):
            assert not owners[a] & owners[b]
    assert all(cs.center_of[c] == c for c in cs.centers)


@pytest.mark.slow
def test_round_mean_within_bifactor_bound():
    """Mean cost <= λ·open + (1 + 2/e^λ)·conn + 3 standard errors"""
    lam = 1.934
    for inst_seed in range(20):
        ufl = generate_euclidean_ufl(5, 8, seed=inst_seed)
        frac, _ = solve_lp_ufl(ufl)
        opening, connection = ufl_costs(ufl, frac)
        bound = lam * opening + (1 + 2 / math.exp(lam)) * connection
        costs = np.array([round_bifactor(ufl, frac, lam, s).total_cost for s in range(300)])
        stderr = costs.std(ddof=1) / math.sqrt(len(costs))
        assert costs.mean() <= bound + 3 * stderr + 1e-6


def test_round_mean_within_bifactor_bound_quick():
    lam = 1.934
    for inst_seed in range(3):
        ufl = generate_euclidean_ufl(4, 6, seed=inst_seed)
        frac, _ = solve_lp_ufl(ufl)
        opening, connection = ufl_costs(ufl, frac)
        bound = lam * opening + (1 + 2 / math.exp(lam)) * connection
        costs = np.array([round_bifactor(ufl, frac, lam, s).total_cost for s in range(60)])
        stderr = costs.std(ddof=1) / math.sqrt(len(costs))
        assert costs.mean() <= bound + 3 * stderr + 1e-6


# ============= RUN TESTS =============

if __name__ == "__main__":
    pytest.main([__file__, "-v"])
