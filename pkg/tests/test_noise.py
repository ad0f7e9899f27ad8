import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from badlands.lattice import build_lattice
from badlands.noise import (
    NoiseError, NoiseProfile, apply_defects, heterogeneous_profile, homogeneous_profile,
    truncated_normal_draw, two_qubit_rate,
)

prob = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def test_homogeneous_values():
    lat = build_lattice(3)
    prof = homogeneous_profile(lat, 0.003)
    assert prof.rates == (0.003,) * 17
    assert homogeneous_profile(lat, 0).rates == (0.0,) * 17


@pytest.mark.parametrize("p", [-0.1, 1.5, float("nan")])
def test_homogeneous_rejects_bad_p(p):
    with pytest.raises(NoiseError):
        homogeneous_profile(build_lattice(3), p)


def test_zero_sigma_equals_homogeneous():
    lat = build_lattice(5)
    het = heterogeneous_profile(lat, 0.003, 0.0, seed=11)
    hom = homogeneous_profile(lat, 0.003)
    assert het.rates == hom.rates
    assert np.array_equal(np.array(het.rates).view(np.uint64), np.array(hom.rates).view(np.uint64))


def test_heterogeneous_is_seeded():
    lat = build_lattice(5)
    a = heterogeneous_profile(lat, 0.005, 0.006, seed=42)
    b = heterogeneous_profile(lat, 0.005, 0.006, seed=42)
    c = heterogeneous_profile(lat, 0.005, 0.006, seed=43)
    assert a.to_json(lat) == b.to_json(lat)
    assert a.rates != c.rates
    assert len(set(a.rates)) > 1


def _truncated_moments(mu, sigma):
    pdf = lambda x: stats.norm.pdf(x, mu, sigma)
    z, _ = integrate.quad(pdf, 0, 1, points=[mu])
    m1, _ = integrate.quad(lambda x: x * pdf(x), 0, 1, points=[mu])
    m2, _ = integrate.quad(lambda x: x * x * pdf(x), 0, 1, points=[mu])
    mean = m1 / z
    return mean, m2 / z - mean ** 2


def test_truncated_mean_matches_quadrature():
    mu, sigma = 0.005, 0.006
    mean, var = _truncated_moments(mu, sigma)
    # truncation at zero pushes the mean well above mu
    assert mean > mu + 0.001
    lat = build_lattice(3)
    rates = np.array([heterogeneous_profile(lat, mu, sigma, seed=42 + k).rates for k in range(10_000)]).ravel()
    assert rates.min() >= 0 and rates.max() <= 1
    se = math.sqrt(var / rates.size)
    assert abs(rates.mean() - mean) < 3 * se


@given(st.integers(0, 2 ** 32), st.floats(0, 1), st.floats(0, 2))
def test_draws_stay_in_unit_interval(seed, mu, sigma):
    out = truncated_normal_draw(np.random.default_rng(seed), mu, sigma, size=20)
    assert ((out >= 0) & (out <= 1)).all()


def test_heterogeneous_rejects_bad_sigma():
    with pytest.raises(NoiseError):
        heterogeneous_profile(build_lattice(3), 0.003, -0.1, seed=0)


def test_defects():
    lat = build_lattice(5)
    base = homogeneous_profile(lat, 0.001)
    assert apply_defects(base, lat, []) == base
    prof = apply_defects(base, lat, [("center data", 0.75)])
    i = lat.coord_to_index((3, 3))
    assert prof.rates[i] == 0.75
    assert sum(r == 0.001 for r in prof.rates) == 48
    assert prof.provenance["defects"][0]["location"] == "center data"


def test_single_defect_on_heterogeneous_base():
    lat = build_lattice(5)
    base = heterogeneous_profile(lat, 0.003, 0.006, seed=3)
    prof = apply_defects(base, lat, [("center data", 0.05)])
    assert sum(r == 0.05 for r in prof.rates) == 1
    assert prof.rates[lat.coord_to_index((3, 3))] == 0.05


def test_defect_errors():
    lat = build_lattice(5)
    base = homogeneous_profile(lat, 0.001)
    with pytest.raises(NoiseError):
        apply_defects(base, lat, [("center data", 0.1), ((3, 3), 0.2)])
    with pytest.raises(NoiseError):
        apply_defects(base, lat, [("center data", 1.1)])
    with pytest.raises(ValueError):
        apply_defects(base, lat, [((7, 7), 0.1)])
    with pytest.raises(NoiseError):
        apply_defects(base, build_lattice(3), [])


def test_two_qubit_rate_values():
    assert two_qubit_rate(0.001, 0.001, 1.2) == 0.0012
    assert two_qubit_rate(0.001, 0.75, 1.2) == pytest.approx(0.4506, abs=1e-15)
    assert two_qubit_rate(1.0, 1.0, 1.2) == 1.0
    with pytest.raises(NoiseError):
        two_qubit_rate(0.1, 0.1, 0.9)
    with pytest.raises(NoiseError):
        two_qubit_rate(0.1, 1.2)


@given(prob, prob)
def test_two_qubit_rate_symmetric(a, b):
    assert two_qubit_rate(a, b) == two_qubit_rate(b, a)


@given(prob, prob, prob)
def test_two_qubit_rate_monotone(a, b, c):
    lo, hi = sorted((b, c))
    assert two_qubit_rate(a, lo) <= two_qubit_rate(a, hi)
    assert 0 <= two_qubit_rate(a, hi) <= 1


def test_profile_json_round_trip(golden):
    lat = build_lattice(3)
    prof = apply_defects(heterogeneous_profile(lat, 0.005, 0.006, seed=42), lat, [("center data", 0.05)])
    text = prof.to_json(lat)
    assert text == (golden / "profile_d3.json").read_text()
    back = NoiseProfile.from_json(text, lat)
    assert back == prof
    doc = json.loads(text)
    assert {(r["x"], r["y"]) for r in doc["rates"]} == {tuple(q.coord) for q in lat.qubits}


def test_profile_json_errors():
    lat = build_lattice(3)
    doc = json.loads(homogeneous_profile(lat, 0.01).to_json(lat))
    doc["rates"].pop()
    with pytest.raises(NoiseError):
        NoiseProfile.from_json(json.dumps(doc), lat)
    with pytest.raises(NoiseError):
        NoiseProfile.from_json(homogeneous_profile(lat, 0.01).to_json(lat), build_lattice(5))
