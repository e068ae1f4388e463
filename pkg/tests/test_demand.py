import random

import pytest
from hypothesis import given, settings, strategies as st

from rwca.demand import (
    CALIBRATION_SEED, CommDemand, CompDemand, DemandError, DemandSyntaxError, GeneratorSpec, Instance,
    decompose_bypass, generate_star_instance, parse_instance, serialize_instance,
)
from rwca.topology import build_topology

REFERENCE_PAIRS = {(2, 3), (4, 10), (5, 7), (6, 11), (8, 9)}


def pairs_of(inst):
    return {(q.src1 + 1, q.src2 + 1) for q in inst.comp}


@pytest.mark.parametrize("seed", [0, 1, 7, 12345])
def test_star_instance_is_a_perfect_matching(cost239, seed):
    inst = generate_star_instance(cost239, GeneratorSpec(0, seed))
    assert not inst.comm and len(inst.comp) == 5
    sources = sorted(v for q in inst.comp for v in (q.src1, q.src2))
    assert sources == list(range(1, 11))
    assert all(q.dst == 0 for q in inst.comp)


def test_calibration_seed_reproduces_reference_pairs(cost239):
    inst = generate_star_instance(cost239, GeneratorSpec(0, CALIBRATION_SEED))
    assert pairs_of(inst) == REFERENCE_PAIRS


def test_generator_is_deterministic(cost239):
    a = generate_star_instance(cost239, GeneratorSpec(4, 99))
    b = generate_star_instance(cost239, GeneratorSpec(4, 99))
    assert serialize_instance(a) == serialize_instance(b)
    # pinned value guards the portable stream against silent changes
    assert pairs_of(generate_star_instance(cost239, GeneratorSpec(0, 93))) == REFERENCE_PAIRS


def test_five_node_topology_gives_two_demands(toy):
    inst = generate_star_instance(toy, GeneratorSpec(toy.node("A"), 3))
    assert len(inst.comp) == 2
    assert sorted(v for q in inst.comp for v in (q.src1, q.src2)) == [1, 2, 3, 4]


def test_odd_remainder_is_rejected():
    t = build_topology(4, [(0, 1), (1, 2), (2, 3)])
    with pytest.raises(DemandError):
        generate_star_instance(t, GeneratorSpec(0, 1))


def test_bad_destination_is_rejected(cost239):
    with pytest.raises(DemandError):
        generate_star_instance(cost239, GeneratorSpec(11, 1))


@pytest.mark.parametrize("q, want", [
    ((2, 3, 1), [(2, 1), (3, 1)]),
    ((8, 9, 1), [(8, 1), (9, 1)]),
])
def test_decompose_bypass_examples(q, want):
    a, b = decompose_bypass(CompDemand(*(v - 1 for v in q)))
    assert [(a.src + 1, a.dst + 1), (b.src + 1, b.dst + 1)] == want


def test_decompose_toy(toy_instance, toy):
    a, b = decompose_bypass(toy_instance.comp[0])
    c = toy.node("C")
    assert (a.src, a.dst, b.src, b.dst) == (toy.node("A"), c, toy.node("B"), c)


def test_demand_invariants():
    with pytest.raises(DemandError):
        CommDemand(3, 3)
    with pytest.raises(DemandError):
        CompDemand(1, 1, 2)
    with pytest.raises(DemandError):
        CompDemand(1, 2, 2)


def test_parse_examples(cost239):
    inst = parse_instance("comp 2 3 1\n", cost239)
    assert list(inst.comp) == [CompDemand(1, 2, 0)]
    with pytest.raises(DemandSyntaxError) as ei:
        parse_instance("# header\ncomm 4 4\n", cost239)
    assert ei.value.lineno == 2
    with pytest.raises(DemandSyntaxError):
        parse_instance("comp 2 3 12\n", cost239)
    with pytest.raises(DemandSyntaxError):
        parse_instance("route 1 2\n", cost239)


def test_shipped_d1_file_matches_calibrated_pairs(d1_instance):
    assert pairs_of(d1_instance) == REFERENCE_PAIRS
    assert {q.dst for q in d1_instance.comp} == {0}


@st.composite
def instances(draw):
    n = draw(st.integers(3, 9))
    t = build_topology(n, [(i, i + 1) for i in range(n - 1)])
    node = st.integers(0, n - 1)
    comm = draw(st.lists(st.tuples(node, node).filter(lambda p: p[0] != p[1]), max_size=4))
    comp = draw(st.lists(st.tuples(node, node, node).filter(lambda p: len(set(p)) == 3), max_size=4))
    w = draw(st.none() | st.integers(1, 9))
    return Instance(t, [CommDemand(*p) for p in comm], [CompDemand(*p) for p in comp], w)


@settings(max_examples=150, deadline=None)
@given(instances())
def test_serialize_round_trip(inst):
    again = parse_instance(serialize_instance(inst), inst.topology)
    assert again == inst


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_decompose_preserves_endpoints(seed):
    a, b, c = random.Random(seed).sample(range(20), 3)
    d1, d2 = decompose_bypass(CompDemand(a, b, c))
    assert {d1.src, d1.dst, d2.src, d2.dst} == {a, b, c}
