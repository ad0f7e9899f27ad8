import math

import pytest
from hypothesis import given, strategies as st

from badlands.circuit import Circuit, Instruction
from badlands.dem import (
    BOUNDARY, MAX_EDGE_P, DemError, ErrorMechanism, build_matching_graph, combine, combine_all,
    dem_from_text, dem_to_text, edge_weight, extract_dem, matching_graph_for,
)
from badlands.lattice import build_lattice
from badlands.matcher import Matcher, MatchingError
from badlands.sampler import propagate_fault

from conftest import memory_circuit


def _insert_before_final_measure(circuit, *extra):
    body = list(circuit.instructions)
    at = max(i for i, x in enumerate(body) if x.name == "M")
    body[at:at] = extra
    return Circuit(tuple(body), circuit.d, circuit.rounds), at


def test_zero_noise_gives_empty_model():
    assert extract_dem(memory_circuit(3, 0.0)) == []


def test_single_isolated_x_error():
    q = build_lattice(3).coord_to_index((2, 2))
    c, at = _insert_before_final_measure(memory_circuit(3, 0.0), Instruction("X_ERROR", (q,), (0.1,)))
    from badlands.sampler import FaultLocation
    oracle_dets, oracle_flip = propagate_fault(c, FaultLocation(at, 0, "X"))
    (m,) = extract_dem(c)
    assert m.probability == 0.1
    assert len(m.detectors) == 2
    assert set(m.detectors) == set(oracle_dets)
    assert m.observable is oracle_flip is False


def test_equal_symptoms_merge():
    q = build_lattice(3).coord_to_index((2, 2))
    ins = Instruction("X_ERROR", (q,), (0.1,))
    c, _ = _insert_before_final_measure(memory_circuit(3, 0.0), ins, ins)
    (m,) = extract_dem(c)
    assert m.probability == pytest.approx(0.1 * 0.9 + 0.9 * 0.1)
    assert m.probability == pytest.approx(0.18)


def test_combine():
    assert combine(0.1, 0.1) == pytest.approx(0.18)
    assert combine(0.0, 0.3) == 0.3
    assert combine_all([]) == 0.0
    assert combine_all([0.5, 0.2]) == pytest.approx(0.5)


@given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=12), st.randoms())
def test_combine_all_is_order_independent(ps, rnd):
    shuffled = list(ps)
    rnd.shuffle(shuffled)
    assert combine_all(shuffled) == combine_all(ps)
    assert 0 <= combine_all(ps) <= 1


def test_model_independent_of_enumeration_order(d3_circuit):
    # Reversing the target order of every noise line permutes the fault enumeration.
    body = []
    for ins in d3_circuit.instructions:
        if ins.is_noise:
            groups = ins.target_groups()[::-1]
            ins = Instruction(ins.name, tuple(q for g in groups for q in g), ins.args)
        body.append(ins)
    flipped = Circuit(tuple(body), d3_circuit.d, d3_circuit.rounds)
    assert dem_to_text(extract_dem(flipped)) == dem_to_text(extract_dem(d3_circuit))


def test_golden_dem(golden, d3_circuit):
    assert dem_to_text(extract_dem(d3_circuit)) == (golden / "d3_p0.001_r3.dem").read_text()


def test_dem_text_round_trip(d3_circuit):
    mechs = extract_dem(d3_circuit)
    back = dem_from_text(dem_to_text(mechs))
    assert back == mechs
    with pytest.raises(DemError):
        dem_from_text("error(0.1) D1 Q4\n")
    with pytest.raises(DemError):
        dem_from_text("oops\n")


@pytest.mark.parametrize("d", [3, 5, 7])
def test_models_are_graphlike_over_z_detectors(d):
    c = memory_circuit(d, 0.001)
    mechs = extract_dem(c)
    z = set(c.z_detectors)
    assert mechs
    for m in mechs:
        assert 1 <= len(m.detectors) <= 2
        assert set(m.detectors) <= z
        assert 0 < m.probability < 0.5


def test_soundness(d3_circuit):
    z = set(d3_circuit.z_detectors)
    checked = 0
    for m in extract_dem(d3_circuit):
        for f in m.sources:
            dets, flip = propagate_fault(d3_circuit, f)
            assert tuple(sorted(dets & z)) == m.detectors
            assert flip == m.observable
            checked += 1
    assert checked > 100


def test_edge_weight():
    assert edge_weight(0.01) == pytest.approx(math.log(99))
    assert edge_weight(0.01) == pytest.approx(4.595, abs=5e-4)
    assert 0 < edge_weight(0.5 - 1e-12) < 1e-10


def test_matching_graph_from_mechanism():
    g = build_matching_graph([ErrorMechanism(0.01, (3, 7), False)])
    (e,) = g.edges
    assert (e.u, e.v) == (3, 7)
    assert e.weight == pytest.approx(4.595, abs=5e-4)
    assert g.nodes == [3, 7]


def test_boundary_edges_and_parallel_merge():
    mechs = [
        ErrorMechanism(0.1, (2,), True),
        ErrorMechanism(0.1, (0, 1), False),
        ErrorMechanism(0.3, (0, 1), True),
    ]
    g = build_matching_graph(mechs, nodes=[0, 1, 2, 5])
    assert g.nodes == [0, 1, 2, 5]
    edges = {(e.u, e.v): e for e in g.edges}
    assert edges[(2, BOUNDARY)].observable is True
    merged = edges[(0, 1)]
    assert merged.probability == pytest.approx(0.1 * 0.7 + 0.9 * 0.3)
    # the likelier contributor decides the mask
    assert merged.observable is True
    assert g.adjacency()[5] == []


def test_clamp_warns():
    with pytest.warns(UserWarning, match="clamped"):
        g = build_matching_graph([ErrorMechanism(0.6, (0, 1), False)])
    (e,) = g.edges
    assert e.probability == MAX_EDGE_P
    assert e.weight > 0


@pytest.mark.parametrize("mech", [
    ErrorMechanism(0.1, (0, 1, 2), False),
    ErrorMechanism(0.0, (0,), False),
    ErrorMechanism(0.1, (), True),
])
def test_non_graphlike_rejected(mech):
    with pytest.raises(DemError):
        build_matching_graph([mech])


def test_empty_model_graph_cannot_decode():
    g = build_matching_graph([], nodes=[0, 1, 2])
    assert g.edges == [] and g.nodes == [0, 1, 2]
    m = Matcher(g)
    assert m.decode([]) is False
    with pytest.raises(MatchingError):
        m.decode([1])


def test_matching_graph_covers_all_z_detectors(d5_circuit):
    g = matching_graph_for(d5_circuit)
    assert g.nodes == d5_circuit.z_detectors
    assert any(e.v == BOUNDARY for e in g.edges)
    # every node reaches the boundary
    adj = g.adjacency()
    seen, todo = {BOUNDARY}, [BOUNDARY]
    while todo:
        n = todo.pop()
        for e in adj[n]:
            for m in (e.u, e.v):
                if m not in seen:
                    seen.add(m)
                    todo.append(m)
    assert set(g.nodes) <= seen
