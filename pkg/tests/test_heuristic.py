import pytest
from hypothesis import given, settings, strategies as st

from conftest import triangle_instance
from randinst import random_instance
from rwca.demand import CommDemand, CompDemand, Instance
from rwca.exact import solve_exact
from rwca.heuristic import UnreachableError, choose_computing_node, solve_heuristic
from rwca.model import SolveConfig, Status, dump_solution
from rwca.topology import build_topology
from rwca.validate import validate

nx = pytest.importorskip("networkx")


def oracle_node(t, q):
    """argmin of the three-leg hop cost, ties: closer source, other source, lowest id."""
    g = nx.Graph(t.undirected_edges())
    sp = dict(nx.all_pairs_shortest_path_length(g))
    cost = {x: sp[q.src1][x] + sp[q.src2][x] + sp[x][q.dst] for x in range(t.node_count) if x != q.dst}
    best = min(cost.values())
    tied = [x for x in cost if cost[x] == best]
    srcs = sorted((s for s in (q.src1, q.src2) if s in tied), key=lambda s: (sp[s][q.dst], s))
    return srcs[0] if srcs else min(tied)


def test_toy_picks_x(toy, toy_instance):
    assert choose_computing_node(toy, toy_instance.comp[0]) == toy.node("X")


def test_triangle_picks_one():
    inst = triangle_instance()
    assert choose_computing_node(inst.topology, inst.comp[0]) == 0


def test_cost239_request_2_3_1(cost239):
    assert choose_computing_node(cost239, CompDemand(1, 2, 0)) == 1


def test_cost239_all_requests_match_oracle(cost239):
    n = cost239.node_count
    for d in range(n):
        for a in range(n):
            for b in range(a + 1, n):
                if d not in (a, b):
                    q = CompDemand(a, b, d)
                    assert choose_computing_node(cost239, q) == oracle_node(cost239, q)


def test_unreachable_node_raises():
    t = build_topology(5, [(0, 1), (1, 2), (3, 4)])
    with pytest.raises(UnreachableError):
        choose_computing_node(t, CompDemand(0, 1, 2))


def test_toy_occin_matches_optimum(toy_instance):
    sol = solve_heuristic(toy_instance, SolveConfig("occin"))
    assert sol.wavelength_count == 1 and sol.status is Status.FEASIBLE


def test_d1_bypass_not_below_optimum(d1_instance):
    cfg = SolveConfig("bypass")
    sol = solve_heuristic(d1_instance, cfg)
    assert sol.wavelength_count >= 3
    assert validate(sol, d1_instance, cfg).ok


def test_single_comm_uses_one_wavelength(cost239):
    sol = solve_heuristic(Instance(cost239, [CommDemand(3, 6)], [], 1), SolveConfig("bypass"))
    assert sol.wavelength_count == 1


def test_infeasible_when_budget_too_small(d1_instance):
    sol = solve_heuristic(d1_instance.with_max_wavelengths(1), SolveConfig("bypass"))
    assert sol.status is Status.INFEASIBLE and not sol.results


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([("bypass", "demand"), ("occin", "demand"), ("occin", "segment")]),
       st.integers(1, 6))
def test_heuristic_bounds_exact_and_validates(seed, cfg, k):
    inst = random_instance(seed)
    config = SolveConfig(*cfg, k_paths=k)
    h = solve_heuristic(inst, config)
    if not h.results:
        return
    assert h.status is Status.FEASIBLE
    assert validate(h, inst, config).ok
    e = solve_exact(inst, SolveConfig(*cfg))
    assert e.status is Status.OPTIMAL and h.wavelength_count >= e.wavelength_count
    assert dump_solution(solve_heuristic(inst, config), False) == dump_solution(h, False)
