"""
Pipeline Test Suite
Default λ and guarantee bounds, both approximation pipelines, trials and checks
"""

import math

import numpy as np
import pytest

from flmsolver.errors import PreconditionError
from flmsolver.models.reports import PipelineConfig
from flmsolver.services import matching as mm
from flmsolver.services.instances import check_solution, fixture, generate_euclidean, make_instance
from flmsolver.services.lp import solve_lp_flm
from flmsolver.services.pipeline import (
    default_lambda, guarantee_bound, resolve_mode, solve, solve_flm_main, solve_flm_perfect, trial_seeds,
)


# ============= PARAMETER TESTS =============

def test_default_lambda_and_bounds():
    """1.934 -> 3.868, 2.373 -> 2.373, 2.218 -> 2.218"""
    assert default_lambda("general") == 1.934
    assert guarantee_bound("general", 1.934) == pytest.approx(3.868)
    assert default_lambda("perfect-reroute") == 2.373
    assert guarantee_bound("perfect-reroute", 2.373) == pytest.approx(2.373)
    assert default_lambda("perfect-direct") == 2.218
    assert guarantee_bound("perfect-direct", 2.218) == pytest.approx(2.218)


def test_guarantee_bound_tail_term_dominates_small_lambda():
    assert guarantee_bound("general", 1.7) == pytest.approx(3 * (1 + 2 / math.exp(1.7)))


def test_unknown_mode_rejected():
    with pytest.raises(PreconditionError):
        default_lambda("lp-only")
    with pytest.raises(PreconditionError):
        guarantee_bound("exact", 2.0)


def test_resolve_mode():
    assert resolve_mode(fixture("gap-2fac"), "auto") == "perfect-direct"
    assert resolve_mode(fixture("triangle-3-2"), "auto") == "general"
    assert resolve_mode(fixture("triangle-3-2"), "perfect-reroute") == "perfect-reroute"


def test_trial_seeds():
    seeds = trial_seeds(5, 4)
    assert seeds[0] == 5
    assert len(set(seeds)) == 4
    assert seeds == trial_seeds(5, 4)


# ============= FIXTURE TESTS =============

def test_colocated_unit_every_mode_costs_one():
    """The single facility is forced open, connections are free"""
    inst = fixture("colocated-unit")
    for mode in ("general", "perfect-reroute", "perfect-direct"):
        for seed in range(3):
            report = solve(inst, PipelineConfig(mode=mode, seed=seed))
            assert report.cost == pytest.approx(1.0)
            assert report.mode == mode


def test_gap_fixture_costs_ten():
    """Any maximum matching of K6 has one cross pair; both facilities are free"""
    inst = fixture("gap-2fac")
    lp = solve_lp_flm(inst)
    for mode in ("general", "perfect-reroute", "perfect-direct"):
        for seed in range(3):
            report = solve(inst, PipelineConfig(mode=mode, seed=seed), lp)
            assert report.cost == pytest.approx(10.0)
            assert report.lp_value == pytest.approx(10.0, abs=1e-6)


def test_auto_resolves_to_perfect_direct():
    report = solve(fixture("gap-2fac"), PipelineConfig(mode="auto", seed=1))
    assert report.mode == "perfect-direct"
    assert report.cost == pytest.approx(10.0)
    assert report.lam == 2.218


def test_perfect_modes_need_perfect_graph():
    inst = fixture("triangle-3-2")
    with pytest.raises(PreconditionError):
        solve(inst, PipelineConfig(mode="perfect-direct"))
    with pytest.raises(PreconditionError):
        solve(inst, PipelineConfig(mode="perfect-reroute"))


def test_lambda_lower_limit():
    with pytest.raises(PreconditionError):
        solve(fixture("gap-2fac"), PipelineConfig(mode="general", lam=1.5))


def test_no_pairs_costs_nothing():
    """ν = 0: empty matching, nothing needs to open"""
    inst = generate_euclidean(2, 5, 0.0, seed=3)
    report = solve(inst, PipelineConfig(mode="general"))
    assert report.cost == 0.0
    assert report.solution.matching == []
    assert report.solution.open_set == []


def test_invalid_instance_rejected():
    inst = make_instance(opening=[-1], metric=[[0, 0, 0]] * 3, edges=[(0, 1)])
    with pytest.raises(PreconditionError):
        solve(inst, PipelineConfig(mode="general"))


# ============= RANDOM INSTANCE TESTS =============

def test_general_pipeline_outputs_are_feasible():
    for seed in range(10):
        inst = generate_euclidean(3, 7, 0.5, seed=seed)
        report = solve_flm_main(inst, PipelineConfig(mode="general", seed=seed))
        sol = report.solution
        assert check_solution(inst, sol) == []
        assert len(sol.matching) == mm.nu(inst.graph)
        assert report.cost >= report.lp_value - 1e-6
        tol = 1e-6 * max(1.0, report.lp_value)
        assert all(slack >= -tol for slack in report.checks.values())


def test_perfect_direct_outputs_are_feasible():
    for seed in range(10):
        inst = generate_euclidean(3, 8, 0.3, seed=seed, ensure_perfect=True)
        report = solve_flm_perfect(inst, PipelineConfig(mode="perfect-direct", seed=seed))
        assert check_solution(inst, report.solution) == []
        assert 2 * len(report.solution.matching) == inst.n_clients
        assert report.cost >= report.lp_value - 1e-6
        assert report.checks["set_distance_triangle"] >= 0.0
        assert report.checks["assignment_below_fractional"] >= -1e-6 * max(1.0, report.lp_value)


def test_perfect_reroute_outputs_are_feasible():
    for seed in range(10):
        inst = generate_euclidean(3, 8, 0.3, seed=seed, ensure_perfect=True)
        report = solve_flm_main(inst, PipelineConfig(mode="perfect-reroute", seed=seed))
        assert report.mode == "perfect-reroute"
        assert check_solution(inst, report.solution) == []
        assert 2 * len(report.solution.matching) == inst.n_clients
        assert report.cost >= report.lp_value - 1e-6
        tol = 1e-6 * max(1.0, report.lp_value)
        assert all(slack >= -tol for slack in report.checks.values())


def test_trials_keep_the_best():
    inst = generate_euclidean(4, 8, 0.5, seed=2, ensure_perfect=True)
    report = solve(inst, PipelineConfig(mode="general", seed=9, trials=4))
    assert len(report.trial_costs) == 4
    assert report.cost == min(report.trial_costs)
    assert report.seed == report.trial_seeds[int(np.argmin(report.trial_costs))]
    assert report.mean_cost == pytest.approx(float(np.mean(report.trial_costs)))


def test_trials_do_not_depend_on_jobs():
    inst = generate_euclidean(4, 8, 0.5, seed=4, ensure_perfect=True)
    lp = solve_lp_flm(inst)
    serial = solve(inst, PipelineConfig(mode="perfect-direct", seed=1, trials=3, jobs=1), lp)
    threaded = solve(inst, PipelineConfig(mode="perfect-direct", seed=1, trials=3, jobs=3), lp)
    assert serial.trial_costs == threaded.trial_costs
    assert serial.solution == threaded.solution


def test_report_serializes_with_lambda_alias():
    report = solve(fixture("colocated-unit"), PipelineConfig(mode="general"))
    data = report.model_dump(by_alias=True)
    assert data["lambda"] == 1.934
    assert "output" not in data["reroute"]


def _check_mean_within_bound(mode: str, bound: float, instances: int, trials: int) -> None:
    """Per-instance mean cost over seeds <= bound·LP + 3 standard errors"""
    perfect = mode != "general"
    for inst_seed in range(instances):
        inst = generate_euclidean(4, 8, 0.4 if perfect else 0.5, seed=inst_seed, ensure_perfect=perfect)
        if mm.nu(inst.graph) == 0:
            continue
        lp = solve_lp_flm(inst)
        report = solve(inst, PipelineConfig(mode=mode, seed=inst_seed, trials=trials), lp)
        costs = np.array(report.trial_costs)
        stderr = costs.std(ddof=1) / math.sqrt(len(costs))
        assert costs.mean() <= bound * report.lp_value + 3 * stderr + 1e-6


def test_mean_cost_within_bound_quick():
    _check_mean_within_bound("general", 3.868, 3, 20)
    _check_mean_within_bound("perfect-reroute", 2.373, 3, 20)
    _check_mean_within_bound("perfect-direct", 2.218, 3, 20)


@pytest.mark.slow
def test_general_mean_cost_within_bound():
    """100 instances × 200 seeds, bound 3.868"""
    _check_mean_within_bound("general", 3.868, 100, 200)


@pytest.mark.slow
def test_perfect_reroute_mean_cost_within_bound():
    """100 instances × 200 seeds, bound 2.373"""
    _check_mean_within_bound("perfect-reroute", 2.373, 100, 200)


@pytest.mark.slow
def test_perfect_direct_mean_cost_within_bound():
    """100 instances × 200 seeds, bound 2.218"""
    _check_mean_within_bound("perfect-direct", 2.218, 100, 200)


# ============= RUN TESTS =============

if __name__ == "__main__":
    pytest.main([__file__, "-v"])
