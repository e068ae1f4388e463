import os
import sys
import tempfile

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from rwca.demand import CommDemand, CompDemand, Instance, builtin_demands, parse_instance
from rwca.model import Coupling, DemandResult, Lightpath, Mode, Solution, Status
from rwca.topology import build_topology, builtin_cost239, builtin_toy


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def lp(t, labels, w, seg=0):
    return Lightpath(t.path([v - 1 for v in labels]), w, seg)


@pytest.fixture(scope="session")
def cost239():
    return builtin_cost239()


@pytest.fixture(scope="session")
def toy():
    return builtin_toy()


@pytest.fixture(scope="session")
def d1_instance(cost239):
    return parse_instance(builtin_demands("cost239_d1"), cost239)


@pytest.fixture(scope="session")
def toy_instance(toy):
    return parse_instance(builtin_demands("toy"), toy)


def bypass_reference(t, inst):
    # bypass provisioning: each source lightpath terminates at node 1
    rows = {
        (2, 3): [([2, 1], 1), ([3, 8, 1], 2)],
        (4, 10): [([4, 10, 2, 1], 2), ([10, 2, 1], 3)],
        (5, 7): [([5, 7, 1], 3), ([7, 1], 1)],
        (6, 11): [([6, 1], 1), ([11, 6, 1], 3)],
        (8, 9): [([8, 1], 1), ([9, 8, 1], 3)],
    }
    results = []
    for q in inst.comp:
        (r1, w1), (r2, w2) = rows[(q.src1 + 1, q.src2 + 1)]
        results.append(DemandResult(q, (lp(t, r1, w1, 1), lp(t, r2, w2, 2)), q.dst))
    return Solution(Mode.BYPASS, Coupling.PER_DEMAND, Status.OPTIMAL, tuple(results), 4)


def occin_reference(t, inst):
    rows = {
        (2, 3): (2, [(2, [3, 2], 1), (3, [2, 1], 1)]),
        (4, 10): (10, [(1, [4, 10], 2), (3, [10, 2, 1], 2)]),
        (5, 7): (7, [(1, [5, 7], 1), (3, [7, 1], 1)]),
        (6, 11): (6, [(2, [11, 6], 1), (3, [6, 1], 1)]),
        (8, 9): (8, [(2, [9, 8], 1), (3, [8, 1], 1)]),
    }
    results = []
    for q in inst.comp:
        x, segs = rows[(q.src1 + 1, q.src2 + 1)]
        results.append(DemandResult(q, tuple(lp(t, r, w, k) for k, r, w in segs), x - 1))
    return Solution(Mode.OCCIN, Coupling.PER_DEMAND, Status.OPTIMAL, tuple(results), 3)


@pytest.fixture
def bypass_reference_solution(cost239, d1_instance):
    return bypass_reference(cost239, d1_instance)


@pytest.fixture
def occin_reference_solution(cost239, d1_instance):
    return occin_reference(cost239, d1_instance)


@pytest.fixture
def toy_solutions(toy, toy_instance):
    q = toy_instance.comp[0]
    a, b, x, i, c = (toy.node(s) for s in "ABXIC")
    bypass = Solution(Mode.BYPASS, Coupling.PER_DEMAND, Status.OPTIMAL, (
        DemandResult(q, (Lightpath(toy.path([a, x, i, c]), 1, 1), Lightpath(toy.path([b, x, i, c]), 2, 2)), c),), 2)
    occin = Solution(Mode.OCCIN, Coupling.PER_DEMAND, Status.OPTIMAL, (
        DemandResult(q, (Lightpath(toy.path([a, x]), 1, 1), Lightpath(toy.path([b, x]), 1, 2),
                         Lightpath(toy.path([x, i, c]), 1, 3)), x),), 2)
    return bypass, occin


def triangle_instance(w=1):
    t = build_topology(3, [(0, 1), (0, 2), (1, 2)], name="triangle")
    return Instance(t, (), (CompDemand(0, 1, 2),), w)


def path3_instance():
    t = build_topology(3, [(0, 1), (1, 2)], name="path3")
    return Instance(t, (CommDemand(0, 2), CommDemand(1, 2)), (), 3)


def highs_solve(lp_text):
    """(objective, solution file text) from HiGHS, or (None, None) if not optimal."""
    highspy = pytest.importorskip("highspy")
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "m.lp")
        with open(path, "w") as fh:
            fh.write(lp_text)
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.readModel(path)
        h.run()
        if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
            return None, None
        sol = os.path.join(d, "m.sol")
        h.writeSolution(sol, 0)
        with open(sol) as fh:
            return round(h.getInfo().objective_function_value), fh.read()
