import io

import numpy as np
import pytest

from badlands.circuit import Circuit, Instruction, serialize
from badlands.lattice import build_lattice
from badlands.sampler import (
    BLOCK_SHOTS, DetectionSample, FaultLocation, SamplerError, fault_components, propagate_columns,
    propagate_fault, sample, write_shots,
)

from conftest import memory_circuit


def _with_inserted(circuit, position, ins):
    body = list(circuit.instructions)
    body.insert(position, ins)
    return Circuit(tuple(body), circuit.d, circuit.rounds), position


def _after_first_round(circuit):
    # the TICK that closes round 0
    mr = next(i for i, x in enumerate(circuit.instructions) if x.name == "MR")
    return next(i for i in range(mr, len(circuit.instructions)) if circuit.instructions[i].name == "TICK") + 1


def _before_final_measure(circuit):
    return max(i for i, x in enumerate(circuit.instructions) if x.name == "M")


def _det_coords(circuit, dets):
    return sorted(circuit.detector_coords[k] for k in dets)


def test_noiseless_sampling_is_all_zero():
    res = sample(memory_circuit(5, 0.0), 10_000, seed=3)
    assert res.detectors.shape == (10_000, 72)
    assert not res.detectors.any() and not res.observables.any()


def test_bulk_x_between_rounds_fires_two_z_detectors():
    base = memory_circuit(3, 0.0)
    q = build_lattice(3).coord_to_index((2, 2))
    c, at = _with_inserted(base, _after_first_round(base), Instruction("X_ERROR", (q,), (0.01,)))
    dets, flip = propagate_fault(c, FaultLocation(at, 0, "X"))
    assert _det_coords(c, dets) == [(1.5, 1.5, 1), (2.5, 2.5, 1)]
    assert set(dets) <= set(c.z_detectors)
    assert flip is False


def test_boundary_x_fires_one_detector_and_flips():
    base = memory_circuit(3, 0.0)
    q = build_lattice(3).coord_to_index((2, 1))
    c, at = _with_inserted(base, _after_first_round(base), Instruction("X_ERROR", (q,), (0.01,)))
    dets, flip = propagate_fault(c, FaultLocation(at, 0, "X"))
    assert _det_coords(c, dets) == [(1.5, 1.5, 1)]
    assert flip is True


@pytest.mark.parametrize("coord", [(1, 1), (2, 2), (3, 1)])
def test_z_on_data_never_flips_observable(coord):
    base = memory_circuit(3, 0.0)
    q = build_lattice(3).coord_to_index(coord)
    c, at = _with_inserted(base, _after_first_round(base), Instruction("DEPOLARIZE1", (q,), (0.01,)))
    dets, flip = propagate_fault(c, FaultLocation(at, 0, "Z"))
    assert flip is False
    assert dets  # caught by the X checks


def test_fault_components_count(d3_circuit):
    faults = fault_components(d3_circuit)
    chans = d3_circuit.noise_channels()
    expected = sum({"DEPOLARIZE1": 3, "DEPOLARIZE2": 15, "X_ERROR": 1}[name] for _, name, _, _ in chans)
    assert len(faults) == expected
    assert fault_components(memory_circuit(3, 0.0)) == []


def test_linearity_on_random_pairs(d3_circuit):
    c = d3_circuit
    faults = fault_components(c)
    rng = np.random.default_rng(1)
    pairs = []
    while len(pairs) < 300:
        a, b = (faults[k] for k in rng.integers(len(faults), size=2))
        if (a.instruction, a.group) != (b.instruction, b.group):
            pairs.append((a, b))
    single_d, single_o = propagate_columns(c, [[f] for p in pairs for f in p])
    both_d, both_o = propagate_columns(c, [list(p) for p in pairs])
    assert np.array_equal(both_d, single_d[0::2] ^ single_d[1::2])
    assert np.array_equal(both_o, single_o[0::2] ^ single_o[1::2])


def test_bad_fault_location(d3_circuit):
    with pytest.raises(SamplerError):
        propagate_fault(d3_circuit, FaultLocation(0, 0, "X"))
    x_err = next(i for i, x in enumerate(d3_circuit.instructions) if x.name == "X_ERROR")
    with pytest.raises(SamplerError):
        propagate_fault(d3_circuit, FaultLocation(x_err, 0, "Z"))


@pytest.mark.parametrize("name,p,flip_rate", [
    ("X_ERROR", 0.02, 0.02),       # sparse path
    ("X_ERROR", 0.3, 0.3),         # dense path
    ("DEPOLARIZE1", 0.3, 0.2),     # X or Y of three
])
def test_isolated_channel_rate(name, p, flip_rate):
    base = memory_circuit(3, 0.0)
    q = build_lattice(3).coord_to_index((2, 2))
    c, _ = _with_inserted(base, _before_final_measure(base), Instruction(name, (q,), (p,)))
    shots = 100_000
    res = sample(c, shots, seed=9)
    fired = res.detectors.any(axis=1)
    # the same two final detectors fire together
    assert (res.detectors.sum(axis=1) % 2 == 0).all()
    sigma = np.sqrt(flip_rate * (1 - flip_rate) / shots)
    assert abs(fired.mean() - flip_rate) < 4 * sigma


def test_isolated_two_qubit_channel_rate():
    base = memory_circuit(3, 0.0)
    lat = build_lattice(3)
    a, b = lat.coord_to_index((1, 1)), lat.coord_to_index((3, 3))
    c, _ = _with_inserted(base, _before_final_measure(base), Instruction("DEPOLARIZE2", (a, b), (0.3,)))
    shots = 100_000
    res = sample(c, shots, seed=2)
    # eight of the fifteen Paulis carry X or Y on the first qubit, which lies on the logical row
    rate = 0.3 * 8 / 15
    sigma = np.sqrt(rate * (1 - rate) / shots)
    assert abs(res.observables[:, 0].mean() - rate) < 4 * sigma


def test_determinism_and_worker_independence(d3_circuit):
    shots = 2 * BLOCK_SHOTS + 123
    a = sample(d3_circuit, shots, seed=17)
    b = sample(d3_circuit, shots, seed=17)
    c = sample(d3_circuit, shots, seed=17, workers=2)
    d = sample(d3_circuit, shots, seed=18)
    for other in (b, c):
        assert np.array_equal(a.detectors, other.detectors)
        assert np.array_equal(a.observables, other.observables)
    assert not np.array_equal(a.detectors, d.detectors)


def test_bad_shot_count(d3_circuit):
    with pytest.raises(SamplerError):
        sample(d3_circuit, 0, seed=1)


def test_write_shots_formats():
    dets = np.array([[1, 0, 0, 1, 1, 0, 0, 0, 1], [0, 0, 0, 0, 0, 0, 0, 0, 0]], dtype=bool)
    obs = np.array([[1], [0]], dtype=bool)
    s = DetectionSample(dets, obs)
    text = io.StringIO()
    write_shots(s, text, "01")
    assert text.getvalue() == "1001100011\n0000000000\n"
    raw = io.BytesIO()
    write_shots(s, raw, "b8")
    # little-endian bit order within each byte; 10 bits pad to 2 bytes per shot
    assert raw.getvalue() == bytes([0b00011001, 0b00000011, 0, 0])
    with pytest.raises(SamplerError):
        write_shots(s, io.StringIO(), "hex")


def test_matches_reference_sampler():
    stim = pytest.importorskip("stim")
    c = memory_circuit(3, 0.01)
    shots = 100_000
    ours = sample(c, shots, seed=4).detectors.mean(axis=0)
    ref = stim.Circuit(serialize(c)).compile_detector_sampler(seed=4).sample(shots).mean(axis=0)
    p = (ours + ref) / 2
    sigma = np.sqrt(2 * p * (1 - p) / shots)
    assert (np.abs(ours - ref) < 4 * sigma).all()
