"""Static SVG figures: noise heatmaps and logical-error-rate curves.

Output is plain SVG 1.1 built from strings with fixed number formatting, so
the same inputs always give the same bytes.  Elements carry ``data-*``
attributes with the underlying values to keep the files inspectable.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence
from xml.sax.saxutils import escape, quoteattr

from .experiment import EPSILON_THR, HETEROGENEOUS, BadBoundary, series
from .lattice import Lattice, QubitKind
from .noise import NoiseProfile

# Samples of a perceptually uniform blue-green-yellow ramp (viridis).
RAMP = (
    (0x44, 0x01, 0x54), (0x48, 0x28, 0x78), (0x3E, 0x49, 0x89), (0x31, 0x68, 0x8E),
    (0x26, 0x82, 0x8E), (0x1F, 0x9E, 0x89), (0x35, 0xB7, 0x79), (0x6E, 0xCE, 0x58),
    (0xFD, 0xE7, 0x25),
)
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


class ReportError(ValueError):
    pass


def ramp_color(t: float) -> str:
    t = min(max(t, 0.0), 1.0) * (len(RAMP) - 1)
    i = min(int(t), len(RAMP) - 2)
    f = t - i
    rgb = [round(a + (b - a) * f) for a, b in zip(RAMP[i], RAMP[i + 1])]
    return "#%02x%02x%02x" % tuple(rgb)


def _f(v: float) -> str:
    return f"{v:.2f}"


def _attr(v) -> str:
    return quoteattr(repr(float(v)) if isinstance(v, float) else str(v))


def _write(path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc.strerror or exc}") from None


def _doc(width: float, height: float, body: list[str]) -> str:
    head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(width)}" '
            f'height="{_f(height)}" viewBox="0 0 {_f(width)} {_f(height)}" '
            f'font-family="Helvetica, Arial, sans-serif">\n')
    return head + "".join(line + "\n" for line in body) + "</svg>\n"


def _tick_label(v: float) -> str:
    return f"{v:.3g}"


# --- heatmap -------------------------------------------------------------

CELL = 28.0
MARGIN = 40.0
LEGEND_W = 90.0


def heatmap_svg(profile: NoiseProfile, lattice: Lattice, title: str | None = None) -> str:
    """One square per qubit at its lattice position, colored by its rate.

    Data qubits carry a '+' glyph and measure qubits an 'X'.  The color
    scale spans [min p_i, max p_i]; a constant profile sits mid-ramp.
    """
    profile.check_lattice(lattice)
    d = lattice.d
    lo, hi = min(profile.rates), max(profile.rates)
    span = 2 * d + 1  # half-unit slots from 0.5 to d + 0.5
    grid_w = span * CELL
    width = MARGIN * 2 + grid_w + LEGEND_W
    height = MARGIN * 2 + grid_w + (20 if title else 0)
    top = MARGIN + (20 if title else 0)
    body = []
    if title:
        body.append(f'<text x="{_f(width / 2)}" y="{_f(MARGIN - 8)}" text-anchor="middle" '
                    f'font-size="14">{escape(title)}</text>')
    body.append(f'<g class="heatmap" data-d="{d}" data-min={_attr(lo)} data-max={_attr(hi)}>')
    for q in lattice.qubits:
        p = profile.rates[q.index]
        t = 0.5 if hi == lo else (p - lo) / (hi - lo)
        col = 2 * q.coord.x - 0.5
        row = 2 * (d + 0.5 - q.coord.y)  # y grows upward
        x = MARGIN + col * CELL
        y = top + row * CELL
        glyph = "+" if q.kind == QubitKind.DATA else "X"
        cls = "data" if q.kind == QubitKind.DATA else "measure"
        ink = "#000000" if t > 0.6 else "#ffffff"
        body.append(f'<g class="qubit {cls}" data-index="{q.index}" data-x={_attr(q.coord.x)} '
                    f'data-y={_attr(q.coord.y)} data-p={_attr(p)}>'
                    f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(CELL)}" height="{_f(CELL)}" '
                    f'fill="{ramp_color(t)}" stroke="#ffffff" stroke-width="1"/>'
                    f'<text class="glyph" x="{_f(x + CELL / 2)}" y="{_f(y + CELL / 2 + 5)}" '
                    f'text-anchor="middle" font-size="14" fill="{ink}">{glyph}</text></g>')
    body.append("</g>")
    # legend: vertical ramp, max at top
    lx = MARGIN * 1.5 + grid_w
    steps = 32
    bar_h = grid_w
    body.append('<g class="legend">')
    for i in range(steps):
        t = 1 - (i + 0.5) / steps
        body.append(f'<rect x="{_f(lx)}" y="{_f(top + i * bar_h / steps)}" width="16.00" '
                    f'height="{_f(bar_h / steps + 0.5)}" fill="{ramp_color(t)}"/>')
    body.append(f'<text x="{_f(lx + 20)}" y="{_f(top + 10)}" font-size="11">{_tick_label(hi)}</text>')
    body.append(f'<text x="{_f(lx + 20)}" y="{_f(top + bar_h)}" font-size="11">{_tick_label(lo)}</text>')
    body.append(f'<text x="{_f(lx)}" y="{_f(top - 6)}" font-size="11">p_i</text>')
    body.append("</g>")
    return _doc(width, height, body)


def emit_heatmap(profile: NoiseProfile, lattice: Lattice, path, title: str | None = None) -> None:
    _write(path, heatmap_svg(profile, lattice, title))


# --- curves --------------------------------------------------------------

PLOT_W, PLOT_H = 520.0, 360.0
PAD_L, PAD_R, PAD_T, PAD_B = 70.0, 180.0, 40.0, 50.0


def _series_label(key: tuple) -> str:
    d, kind, sigma, loc, p_def = key
    parts = [f"d={d}"]
    if kind == HETEROGENEOUS:
        parts.append(f"p_sigma={sigma:g}")
    if loc:
        parts.append(f"p_def={p_def:g}")
    return " ".join(parts)


def _bad_key(b: BadBoundary) -> tuple:
    lab = b.label
    return (b.d, lab.get("noise_kind"), lab.get("p_sigma"), lab.get("defect_loc"), lab.get("p_def"))


def _log_range(values: Iterable[float]) -> tuple[float, float]:
    vals = [v for v in values if v > 0]
    lo, hi = min(vals), max(vals)
    if lo == hi:
        lo, hi = lo / 2, hi * 2
    return math.floor(math.log10(lo) * 4) / 4, math.ceil(math.log10(hi) * 4) / 4


def curves_svg(points: Sequence, boundaries: Sequence[BadBoundary] = (), epsilon_thr: float = EPSILON_THR,
               title: str | None = None, x_label: str = "physical error rate p") -> str:
    """Log-log epsilon_round vs noise, one series per curve, with CI bars.

    ``points`` may be SweepPoints or pooled points.  Zero-rate points have
    no place on a log axis and are drawn as hollow markers on the floor.
    BAD markers are drawn only for boundaries that report a crossing.
    """
    if not points:
        raise ReportError("no points to plot")
    groups = series(points)
    xs = [pt.p for pt in points]
    ys = [epsilon_thr]
    for pt in points:
        lo, hi = pt.ci
        ys += [pt.epsilon_round, lo, hi]
    crossed = [b for b in boundaries if b.crossed]
    xs += [b.crossing for b in crossed]
    if not any(x > 0 for x in xs):
        raise ReportError("noise values must include a positive value for a log axis")
    x0, x1 = _log_range(xs)
    y0, y1 = _log_range(ys)
    width, height = PAD_L + PLOT_W + PAD_R, PAD_T + PLOT_H + PAD_B

    def sx(v: float) -> float:
        return PAD_L + (math.log10(v) - x0) / (x1 - x0) * PLOT_W

    def sy(v: float) -> float:
        v = max(v, 10 ** y0)
        return PAD_T + PLOT_H - (math.log10(v) - y0) / (y1 - y0) * PLOT_H

    body = []
    if title:
        body.append(f'<text x="{_f(PAD_L + PLOT_W / 2)}" y="{_f(PAD_T - 16)}" text-anchor="middle" '
                    f'font-size="14">{escape(title)}</text>')
    body.append(f'<rect class="frame" x="{_f(PAD_L)}" y="{_f(PAD_T)}" width="{_f(PLOT_W)}" '
                f'height="{_f(PLOT_H)}" fill="none" stroke="#000000"/>')
    for e in range(math.ceil(x0), math.floor(x1) + 1):
        x = sx(10.0 ** e)
        body.append(f'<line x1="{_f(x)}" y1="{_f(PAD_T + PLOT_H)}" x2="{_f(x)}" y2="{_f(PAD_T + PLOT_H + 5)}" stroke="#000000"/>')
        body.append(f'<text x="{_f(x)}" y="{_f(PAD_T + PLOT_H + 18)}" text-anchor="middle" font-size="11">1e{e}</text>')
    for e in range(math.ceil(y0), math.floor(y1) + 1):
        y = sy(10.0 ** e)
        body.append(f'<line x1="{_f(PAD_L - 5)}" y1="{_f(y)}" x2="{_f(PAD_L)}" y2="{_f(y)}" stroke="#000000"/>')
        body.append(f'<text x="{_f(PAD_L - 8)}" y="{_f(y + 4)}" text-anchor="end" font-size="11">1e{e}</text>')
    body.append(f'<text x="{_f(PAD_L + PLOT_W / 2)}" y="{_f(height - 10)}" text-anchor="middle" '
                f'font-size="12">{escape(x_label)}</text>')
    body.append(f'<text x="16" y="{_f(PAD_T + PLOT_H / 2)}" text-anchor="middle" font-size="12" '
                f'transform="rotate(-90 16 {_f(PAD_T + PLOT_H / 2)})">logical error rate per round</text>')
    ty = sy(epsilon_thr)
    body.append(f'<line class="threshold" data-value={_attr(float(epsilon_thr))} x1="{_f(PAD_L)}" y1="{_f(ty)}" '
                f'x2="{_f(PAD_L + PLOT_W)}" y2="{_f(ty)}" stroke="#444444" stroke-dasharray="6,4"/>')

    bads = {_bad_key(b): b for b in crossed}
    for n, (key, pts) in enumerate(groups.items()):
        color = PALETTE[n % len(PALETTE)]
        label = _series_label(key)
        body.append(f'<g class="series" data-label={quoteattr(label)} data-d="{key[0]}">')
        pos = [pt for pt in pts if pt.epsilon_round > 0 and pt.p > 0]
        if len(pos) > 1:
            path = " ".join(f"{_f(sx(pt.p))},{_f(sy(pt.epsilon_round))}" for pt in pos)
            body.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for pt in pts:
            if pt.p <= 0:
                continue
            lo, hi = pt.ci
            cx = sx(pt.p)
            if hi > 0:
                body.append(f'<line class="ci" x1="{_f(cx)}" y1="{_f(sy(lo))}" x2="{_f(cx)}" y2="{_f(sy(hi))}" '
                            f'stroke="{color}"/>')
            if pt.epsilon_round > 0:
                body.append(f'<circle class="point" cx="{_f(cx)}" cy="{_f(sy(pt.epsilon_round))}" r="3" '
                            f'fill="{color}" data-p={_attr(float(pt.p))} data-eps={_attr(float(pt.epsilon_round))}/>')
            else:
                body.append(f'<circle class="point zero" cx="{_f(cx)}" cy="{_f(sy(0))}" r="3" fill="none" '
                            f'stroke="{color}" data-p={_attr(float(pt.p))} data-eps="0.0"/>')
        bad = bads.get(key)
        if bad is not None:
            bx, by = sx(bad.crossing), ty
            body.append(f'<path class="bad" data-d="{bad.d}" data-bad={_attr(float(bad.crossing))} '
                        f'd="M {_f(bx)} {_f(by - 6)} L {_f(bx + 6)} {_f(by)} L {_f(bx)} {_f(by + 6)} '
                        f'L {_f(bx - 6)} {_f(by)} Z" fill="{color}" stroke="#000000"/>')
        ly = PAD_T + 14 + 16 * n
        lx = PAD_L + PLOT_W + 14
        body.append(f'<line x1="{_f(lx)}" y1="{_f(ly - 4)}" x2="{_f(lx + 18)}" y2="{_f(ly - 4)}" '
                    f'stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{_f(lx + 24)}" y="{_f(ly)}" font-size="11">{escape(label)}</text>')
        body.append("</g>")
    return _doc(width, height, body)


def emit_curves(points: Sequence, boundaries: Sequence[BadBoundary], path, epsilon_thr: float = EPSILON_THR,
                title: str | None = None, x_label: str = "physical error rate p") -> None:
    _write(path, curves_svg(points, boundaries, epsilon_thr, title, x_label))
