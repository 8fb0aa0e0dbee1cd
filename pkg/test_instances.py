"""
Instance Test Suite
Validation, distances, solution costs, generators, fixtures and the UFL reduction
"""

import json

import numpy as np
import pytest

from conftest import line_instance, zero_metric
from flmsolver.errors import FeasibilityError, PreconditionError, UnknownIdentifierError
from flmsolver.models.instance import Client, Facility, UflInstance
from flmsolver.services import matching as mm
from flmsolver.services.instances import (
    FIXTURES, build_solution, check_solution, edge_length, fixture, generate_euclidean,
    make_instance, metric_closure, pair_distance, reduce_ufl_to_flm, set_distance, solution_cost,
    validate_instance,
)
from flmsolver.services.oracle import exact_solve
from flmsolver.utils.instance_io import read_instance, read_solution, write_instance, write_json


# ============= VALIDATION TESTS =============

def test_fixtures_are_valid():
    """Every named fixture passes validation"""
    for name in FIXTURES:
        assert validate_instance(fixture(name)) == []


def test_triangle_violation_is_reported():
    """Co-located clients at different distances from a facility break the triangle inequality"""
    inst = make_instance(opening=[0], metric=[[0, 3, 5], [3, 0, 0], [5, 0, 0]], edges=[(0, 1)])
    violations = validate_instance(inst)
    assert violations
    assert any("triangle inequality violated" in v for v in violations)


def test_negative_opening_cost_is_reported():
    """f(i) = -1 is flagged"""
    inst = make_instance(opening=[-1], metric=zero_metric(3), edges=[(0, 1)])
    assert any("negative opening cost" in v for v in validate_instance(inst))


def test_generated_instances_are_valid():
    """Euclidean instances satisfy every invariant"""
    for seed in range(10):
        inst = generate_euclidean(3, 6, 0.5, seed=seed)
        assert validate_instance(inst) == []


def test_bad_edges_are_reported():
    """Unknown clients and duplicate edges are itemized"""
    inst = make_instance(opening=[0], metric=zero_metric(3), edges=[(0, 1), (1, 0), (0, 5)])
    violations = validate_instance(inst)
    assert any("duplicate edge" in v for v in violations)
    assert any("unknown client" in v for v in violations)


# ============= DISTANCE TESTS =============

def test_pair_distance_is_a_sum():
    """d(i, e) = d(i, j) + d(i, k)"""
    inst = line_instance([0], [0, 2, -3], [(0, 1)])
    assert pair_distance(inst, 0, (0, 1)) == pytest.approx(5.0)


def test_pair_distance_colocated_is_zero():
    inst = fixture("colocated-unit")
    assert pair_distance(inst, 0, (1, 2)) == 0.0


def test_edge_length_below_pair_distance():
    """d(e) <= d(i, e) for every facility and edge"""
    for seed in range(5):
        inst = generate_euclidean(3, 6, 0.7, seed=seed)
        lengths = inst.edge_lengths
        assert np.all(lengths[None, :] <= inst.pair_dist + 1e-9)
        for pos, e in enumerate(inst.graph.edges):
            assert edge_length(inst, e) == pytest.approx(lengths[pos])


def test_set_distance_minimum_and_ties():
    """Minimum over S, ties broken by the lowest facility index"""
    inst = line_instance([0, 0], [0, 8, 3], [])
    assert set_distance(inst, [0, 1], 0) == (3.0, 0)
    tied = line_instance([0, 0], [0, 8, 4], [])
    assert set_distance(tied, [1, 0], 0) == (4.0, 0)


def test_set_distance_cross_pair_on_gap_fixture():
    """A pair with one client at each facility is 10 away from any set"""
    inst = fixture("gap-2fac")
    assert set_distance(inst, [0, 1], (0, 3))[0] == pytest.approx(10.0)


def test_set_distance_errors():
    inst = fixture("gap-2fac")
    with pytest.raises(PreconditionError):
        set_distance(inst, [], 0)
    with pytest.raises(UnknownIdentifierError):
        set_distance(inst, [7], 0)
    with pytest.raises(UnknownIdentifierError):
        pair_distance(inst, 0, (0, 42))


# ============= SOLUTION TESTS =============

def test_solution_cost_without_pairs():
    """ν = 0: only the opening cost is paid"""
    inst = make_instance(opening=[7], metric=zero_metric(3), edges=[])
    sol = build_solution(inst, [0], [])
    assert solution_cost(inst, sol) == (7.0, 7.0, 0.0)


def test_solution_cost_gap_fixture():
    """Both facilities, one pair per triple and one cross pair: cost 10"""
    inst = fixture("gap-2fac")
    sol = build_solution(inst, [0, 1], [(0, 1), (2, 3), (4, 5)])
    total, opening, connection = solution_cost(inst, sol)
    assert total == pytest.approx(10.0)
    assert opening == 0.0
    assert sol.assignment == [0, 0, 1]


def test_check_solution_itemizes_violations():
    """Non-maximum matching and closed targets are named"""
    inst = fixture("gap-2fac")
    short = build_solution(inst, [0, 1], [(0, 1), (4, 5)])
    assert any("matching not maximum" in v for v in check_solution(inst, short))

    sol = build_solution(inst, [0, 1], [(0, 1), (2, 3), (4, 5)])
    closed = sol.model_copy(update={"open_set": [0]})
    assert any("assignment target not open" in v for v in check_solution(inst, closed))
    with pytest.raises(FeasibilityError):
        solution_cost(inst, closed)

    bad_edge = sol.model_copy(update={"matching": [(0, 1), (2, 3), (4, 4)]})
    assert any("not compatible" in v for v in check_solution(inst, bad_edge))


def test_check_solution_cost_mismatch():
    inst = fixture("gap-2fac")
    sol = build_solution(inst, [0, 1], [(0, 1), (2, 3), (4, 5)])
    wrong = sol.model_copy(update={"connection_cost_total": 3.0})
    assert any("differs from recomputed" in v for v in check_solution(inst, wrong))


# ============= GENERATOR TESTS =============

def test_generate_is_deterministic():
    """Same seed, same instance"""
    a = generate_euclidean(4, 10, 0.5, seed=7)
    b = generate_euclidean(4, 10, 0.5, seed=7)
    assert a.model_dump() == b.model_dump()
    assert a.model_dump() != generate_euclidean(4, 10, 0.5, seed=8).model_dump()


def test_generate_edge_probability_extremes():
    """p = 1 gives the complete graph, p = 0 no pairs"""
    full = generate_euclidean(2, 6, 1.0, seed=1)
    assert len(full.edges) == 15
    empty = generate_euclidean(2, 6, 0.0, seed=1)
    assert empty.edges == []
    assert mm.nu(empty.graph) == 0


def test_generate_planted_perfect_matching():
    for seed in range(5):
        inst = generate_euclidean(3, 8, 0.1, seed=seed, ensure_perfect=True)
        assert mm.is_perfectly_matchable(inst.graph)


def test_generate_rejects_bad_parameters():
    with pytest.raises(PreconditionError):
        generate_euclidean(0, 4, 0.5)
    with pytest.raises(PreconditionError):
        generate_euclidean(2, 4, 1.5)
    with pytest.raises(PreconditionError):
        generate_euclidean(2, 5, 0.5, ensure_perfect=True)


# ============= FIXTURE TESTS =============

def test_fixture_shapes_and_nu():
    """gap-2fac is K6 (ν=3), colocated-unit K4 (ν=2), triangle-3-2 K3 (ν=1)"""
    expected = {"gap-2fac": (2, 6, 15, 3), "colocated-unit": (1, 4, 6, 2), "triangle-3-2": (1, 3, 3, 1),
                "collinear-3": (1, 3, 2, 1)}
    for name, (nf, nc, ne, nu) in expected.items():
        inst = fixture(name)
        assert (inst.n_facilities, inst.n_clients, len(inst.edges)) == (nf, nc, ne)
        assert mm.nu(inst.graph) == nu


def test_unknown_fixture():
    with pytest.raises(UnknownIdentifierError):
        fixture("nope")


# ============= REDUCTION TESTS =============

def test_reduction_single_client():
    """1 facility (f=3), 1 client at distance 2 -> f=6, two co-located clients, optimum 10"""
    ufl = UflInstance(facilities=[Facility(id=0, opening_cost=3)], clients=[Client(id=0)],
                      assignment_cost=[[2]])
    inst = reduce_ufl_to_flm(ufl)
    assert inst.n_clients == 2
    assert inst.edges == [(0, 1)]
    assert inst.opening.tolist() == [6.0]
    assert inst.dist[1, 2] == 0.0
    assert validate_instance(inst) == []
    assert exact_solve(inst).optimum == pytest.approx(10.0)


def test_reduction_structure():
    """Two clients -> four clients, two edges, ν=2"""
    ufl = UflInstance(
        facilities=[Facility(id=0, opening_cost=1), Facility(id=1, opening_cost=2)],
        clients=[Client(id=0), Client(id=1)],
        assignment_cost=[[1, 4], [3, 2]],
    )
    inst = reduce_ufl_to_flm(ufl)
    assert inst.n_clients == 4
    assert len(inst.edges) == 2
    assert mm.nu(inst.graph) == 2


def test_metric_closure_shortcuts():
    D = np.array([[0, 1, 9], [1, 0, 1], [9, 1, 0]], dtype=float)
    assert metric_closure(D)[0, 2] == 2.0


# ============= I/O TESTS =============

def test_instance_roundtrip_file(tmp_path):
    """write then read gives the same instance"""
    inst = fixture("gap-2fac")
    path = tmp_path / "gap.json"
    write_instance(path, inst)
    assert read_instance(path).model_dump() == inst.model_dump()


def test_instance_roundtrip_keeps_file_text(tmp_path):
    """Null and missing labels, int and float numbers all survive write(read(file))"""
    text = (
        '{"facilities": [{"id": 0, "label": null, "opening_cost": 2}, {"id": 1, "opening_cost": 0.5}],'
        ' "clients": [{"id": 0, "label": "a"}, {"id": 1}],'
        ' "metric": [[0, 1, 1, 1.5], [1, 0, 1.5, 1], [1, 1.5, 0, 1], [1.5, 1, 1, 0]],'
        ' "edges": [[0, 1]]}'
    )
    src = tmp_path / "src.json"
    src.write_text(text)
    out = tmp_path / "out.json"
    write_instance(out, read_instance(src))
    written = out.read_text()
    assert json.loads(written) == json.loads(text)
    assert '"label": null' in written
    assert written.count('"label"') == 2
    assert '"opening_cost": 2\n' in written


def test_read_solution_unwraps_reports(tmp_path):
    inst = fixture("gap-2fac")
    sol = build_solution(inst, [0, 1], [(0, 1), (2, 3), (4, 5)])
    path = tmp_path / "report.json"
    write_json(path, {"optimum": 10.0, "optimal_solution": sol.model_dump()})
    assert read_solution(path).matching == sol.matching


def test_read_instance_errors(tmp_path):
    with pytest.raises(PreconditionError):
        read_instance(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(PreconditionError):
        read_instance(bad)


# ============= RUN TESTS =============

if __name__ == "__main__":
    pytest.main([__file__, "-v"])
