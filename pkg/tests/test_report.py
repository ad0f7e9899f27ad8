import xml.etree.ElementTree as ET

import pytest

from badlands.experiment import SweepPoint, bads_for
from badlands.lattice import build_lattice
from badlands.noise import apply_defects, heterogeneous_profile, homogeneous_profile
from badlands.report import ReportError, curves_svg, emit_curves, emit_heatmap, heatmap_svg, ramp_color

NS = {"svg": "http://www.w3.org/2000/svg"}


def _qubits(svg):
    root = ET.fromstring(svg)
    out = []
    for g in root.iter("{http://www.w3.org/2000/svg}g"):
        if "qubit" in g.get("class", "").split():
            rect = g.find("svg:rect", NS)
            text = g.find("svg:text", NS)
            out.append((float(g.get("data-x")), float(g.get("data-y")), rect.get("fill"), text.text))
    return out


def test_homogeneous_heatmap_d5():
    lat = build_lattice(5)
    svg = heatmap_svg(homogeneous_profile(lat, 0.001), lat, "homogeneous d=5")
    cells = _qubits(svg)
    assert len(cells) == 49
    glyphs = [c[3] for c in cells]
    assert glyphs.count("+") == 25 and glyphs.count("X") == 24
    assert len({c[2] for c in cells}) == 1
    assert all(g == "+" for x, y, _, g in cells if float(x).is_integer())


def test_defect_cell_is_hottest():
    lat = build_lattice(5)
    prof = apply_defects(homogeneous_profile(lat, 0.001), lat, [("center data", 0.05)])
    cells = _qubits(heatmap_svg(prof, lat))
    hot = [c for c in cells if c[2] == ramp_color(1.0)]
    assert [(x, y) for x, y, _, _ in hot] == [(3.0, 3.0)]
    assert len({c[2] for c in cells}) == 2


def test_heatmap_is_byte_deterministic(tmp_path):
    lat = build_lattice(5)
    prof = heterogeneous_profile(lat, 0.003, 0.006, seed=5)
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    emit_heatmap(prof, lat, a)
    emit_heatmap(prof, lat, b)
    assert a.read_bytes() == b.read_bytes()
    ET.fromstring(a.read_text())


def test_ramp_endpoints():
    assert ramp_color(0.0) != ramp_color(1.0)
    assert ramp_color(-1) == ramp_color(0.0) and ramp_color(2) == ramp_color(1.0)


def _curve(d, errors, shots=10_000):
    ps = [0.001, 0.002, 0.004, 0.008]
    return [SweepPoint(d, "homogeneous", p, 0.0, "", None, 0, shots, 3, e, 0) for p, e in zip(ps, errors)]


def test_curves_mark_only_crossed_boundaries():
    pts = _curve(3, [200, 300, 500, 900]) + _curve(5, [10, 60, 300, 1500])
    bads = bads_for(pts)
    assert [b.crossed for b in bads] == [False, True]
    root = ET.fromstring(curves_svg(pts, bads))
    markers = [el for el in root.iter() if el.get("class") == "bad"]
    assert len(markers) == 1 and markers[0].get("data-d") == "5"
    assert float(markers[0].get("data-bad")) == bads[1].crossing
    series = [el for el in root.iter() if el.get("class") == "series"]
    assert [s.get("data-d") for s in series] == ["3", "5"]
    assert len([el for el in root.iter() if el.get("class") == "point"]) == 8
    (thr,) = [el for el in root.iter() if el.get("class") == "threshold"]
    assert float(thr.get("data-value")) == 0.0057


def test_single_point_plot():
    pt = _curve(3, [50])
    root = ET.fromstring(curves_svg(pt, []))
    assert len([el for el in root.iter() if el.get("class") == "point"]) == 1
    assert not [el for el in root.iter() if el.get("class") == "bad"]


def test_zero_rate_points_drawn_hollow():
    pts = _curve(7, [0, 0, 3, 40])
    root = ET.fromstring(curves_svg(pts, bads_for(pts)))
    assert len([el for el in root.iter() if el.get("class") == "point zero"]) == 2


def test_curves_errors(tmp_path):
    with pytest.raises(ReportError):
        curves_svg([], [])
    with pytest.raises(ReportError):
        emit_curves(_curve(3, [5, 6]), [], tmp_path / "missing" / "x.svg")
    lat = build_lattice(3)
    with pytest.raises(ReportError):
        emit_heatmap(homogeneous_profile(lat, 0.001), lat, tmp_path)


def test_curves_deterministic():
    pts = _curve(3, [20, 40, 90, 200])
    assert curves_svg(pts, bads_for(pts), title="t") == curves_svg(pts, bads_for(pts), title="t")
