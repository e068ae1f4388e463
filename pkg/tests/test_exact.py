import pytest
from hypothesis import given, settings, strategies as st

from conftest import path3_instance, triangle_instance
from randinst import random_instance
from rwca.demand import CommDemand, Instance
from rwca.exact import lower_bound, solve_exact, solve_via_ilp
from rwca.milp import AssignmentParseError, InfeasibleAssignmentError, assignment_from_solution, encode, \
    format_assignment
from rwca.model import SolveConfig, Status, dump_solution
from rwca.topology import build_topology
from rwca.validate import validate


@pytest.mark.parametrize("mode, count, units", [("bypass", 2, 6), ("occin", 1, 4)])
def test_toy(toy_instance, mode, count, units):
    sol = solve_exact(toy_instance, SolveConfig(mode))
    assert sol.status is Status.OPTIMAL
    assert (sol.wavelength_count, sol.wavelength_link_units) == (count, units)


@pytest.mark.parametrize("mode, count", [("bypass", 3), ("occin", 2)])
def test_d1_instance(d1_instance, mode, count):
    cfg = SolveConfig(mode)
    sol = solve_exact(d1_instance, cfg)
    assert sol.status is Status.OPTIMAL and sol.wavelength_count == count
    assert validate(sol, d1_instance, cfg).ok


def test_path_graph_pigeonhole():
    sol = solve_exact(path3_instance(), SolveConfig("bypass"))
    assert sol.wavelength_count == 2 and sol.status is Status.OPTIMAL


def test_triangle_fits_one_wavelength():
    sol = solve_exact(triangle_instance(1), SolveConfig("occin"))
    assert sol.wavelength_count == 1
    assert sol.results[0].computing_node in (0, 1)


def test_lower_bound_examples(cost239, d1_instance):
    assert cost239.in_degree(0) == 4
    assert lower_bound(d1_instance, "bypass") == 3
    assert lower_bound(d1_instance, "occin") == 2
    single = Instance(cost239, [CommDemand(4, 9)], [], 2)
    assert lower_bound(single, "bypass") == lower_bound(single, "occin") == 1


def test_infeasible_budget():
    inst = path3_instance().with_max_wavelengths(1)
    sol = solve_exact(inst, SolveConfig("bypass"))
    assert sol.status is Status.INFEASIBLE and not sol.results


def test_disconnected_is_infeasible():
    t = build_topology(4, [(0, 1), (2, 3)])
    sol = solve_exact(Instance(t, [CommDemand(0, 3)], [], 2), SolveConfig("bypass"))
    assert sol.status is Status.INFEASIBLE


def test_node_limit_reports_limit(d1_instance):
    sol = solve_exact(d1_instance, SolveConfig("bypass", node_limit=2))
    assert sol.status is Status.LIMIT_REACHED
    if sol.results:
        assert validate(sol, d1_instance, SolveConfig("bypass")).ok


def test_deterministic_output_is_bit_identical(d1_instance):
    cfg = SolveConfig("occin", deterministic=True)
    a = dump_solution(solve_exact(d1_instance, cfg), include_timing=False)
    b = dump_solution(solve_exact(d1_instance, cfg), include_timing=False)
    assert a == b


def test_parallel_width_keeps_objective(d1_instance):
    for mode in ("bypass", "occin"):
        seq = solve_exact(d1_instance, SolveConfig(mode))
        par = solve_exact(d1_instance, SolveConfig(mode, deterministic=False, parallel_width=3))
        assert par.wavelength_count == seq.wavelength_count
        assert validate(par, d1_instance, SolveConfig(mode)).ok


def test_solve_via_ilp_examples(d1_instance, occin_reference_solution, toy_instance):
    cfg = SolveConfig("occin", max_wavelengths=3)
    m = encode(d1_instance, "occin", "demand", 3)
    text = format_assignment(m, assignment_from_solution(m, occin_reference_solution, d1_instance))
    sol = solve_via_ilp(d1_instance, cfg, text)
    assert sol.wavelength_count == 2 and sol.status is Status.OPTIMAL
    with pytest.raises(AssignmentParseError):
        solve_via_ilp(d1_instance, cfg, "")
    with pytest.raises(InfeasibleAssignmentError):
        solve_via_ilp(toy_instance, SolveConfig("occin", max_wavelengths=3), text)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["bypass", "occin"]))
def test_more_wavelengths_never_hurt(seed, mode):
    inst = random_instance(seed)
    counts = []
    for w in (1, 2, 3, 4):
        sol = solve_exact(inst.with_max_wavelengths(w), SolveConfig(mode))
        counts.append(sol.wavelength_count if sol.status is Status.OPTIMAL else None)
    found = [c for c in counts if c is not None]
    assert all(c == found[0] for c in found)
    first = next((i for i, c in enumerate(counts) if c is not None), None)
    if first is not None:
        assert all(c is not None for c in counts[first:])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([("bypass", "demand"), ("occin", "demand"), ("occin", "segment")]))
def test_optimal_solutions_validate(seed, cfg):
    inst = random_instance(seed)
    config = SolveConfig(*cfg)
    sol = solve_exact(inst, config)
    if sol.status is Status.OPTIMAL:
        assert validate(sol, inst, config).ok
        assert lower_bound(inst, cfg[0]) <= sol.wavelength_count
        # optimality certificate: either the bound is met or W-1 was refuted
        w = sol.wavelength_count
        assert w == sol.stats["lower_bound"] or w - 1 in sol.stats["infeasible_budgets"]
