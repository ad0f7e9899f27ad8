"""Sweeps over (distance, noise) grids, BAD crossings and scaling fits.

The per-round logical error rate of a point is ``errors / (shots * rounds)``.
Its 95% interval is the Wilson interval of the per-shot failure probability
scaled by ``1/rounds``, so estimate and bounds share one normalization.
"""

from __future__ import annotations

import concurrent.futures as cf
import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np
import tomli
from scipy.stats import binomtest

from .circuit import build_memory_circuit
from .dem import matching_graph_for
from .lattice import LatticeError, build_lattice, parse_location
from .matcher import Matcher
from .noise import apply_defects, heterogeneous_profile, homogeneous_profile
from .sampler import iter_blocks

EPSILON_THR = 0.0057
P_THR = 0.0057
DEFAULT_SHOTS = 100_000
DEFAULT_DRAWS = 5

HOMOGENEOUS = "homogeneous"
HETEROGENEOUS = "heterogeneous"

CSV_COLUMNS = (
    "d", "noise_kind", "p_or_pmu", "p_sigma", "defect_loc", "p_def", "draw_id",
    "shots", "rounds", "errors", "eps_round", "ci_lo", "ci_hi", "seed",
)


class ExperimentError(ValueError):
    pass


@dataclass
class SweepConfig:
    distances: list[int]
    p_values: list[float]
    noise: str = HOMOGENEOUS
    p_sigmas: list[float] = field(default_factory=lambda: [0.0])
    # (location, [p_def, ...]) pairs; each p_def becomes its own series.
    defects: list[tuple[str, list[float]]] = field(default_factory=list)
    include_defect_free: bool = True
    rounds: int = 3
    shots: int = DEFAULT_SHOTS
    epsilon_thr: float = EPSILON_THR
    seed: int = 0
    draws: int = DEFAULT_DRAWS

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.distances:
            raise ExperimentError("distances must not be empty")
        for d in self.distances:
            if not isinstance(d, int) or d < 3 or d % 2 == 0:
                raise ExperimentError(f"distances must be odd integers >= 3, got {d!r}")
        if not self.p_values:
            raise ExperimentError("the noise axis must not be empty")
        for p in self.p_values:
            if not 0 <= p <= 1:
                raise ExperimentError(f"noise values must lie in [0, 1], got {p!r}")
        if self.noise not in (HOMOGENEOUS, HETEROGENEOUS):
            raise ExperimentError(f"noise must be {HOMOGENEOUS!r} or {HETEROGENEOUS!r}, got {self.noise!r}")
        if self.noise == HOMOGENEOUS and any(s != 0 for s in self.p_sigmas):
            raise ExperimentError("p_sigma values need noise = 'heterogeneous'")
        if any(s < 0 for s in self.p_sigmas):
            raise ExperimentError("p_sigma values must be >= 0")
        if self.shots < 1:
            raise ExperimentError(f"shots must be >= 1, got {self.shots}")
        if self.rounds < 1:
            raise ExperimentError(f"rounds must be >= 1, got {self.rounds}")
        if not 0 < self.epsilon_thr < 1:
            raise ExperimentError(f"epsilon_thr must lie in (0, 1), got {self.epsilon_thr}")
        if self.draws < 1:
            raise ExperimentError(f"draws must be >= 1, got {self.draws}")
        for loc, pdefs in self.defects:
            for d in self.distances:
                try:
                    build_lattice(d).resolve(parse_location(loc))
                except LatticeError as exc:
                    raise ExperimentError(f"defect location {loc!r}: {exc}") from None
            if not pdefs or any(not 0 <= p <= 1 for p in pdefs):
                raise ExperimentError(f"p_def values for {loc!r} must be a non-empty list in [0, 1]")

    def defect_options(self) -> list[tuple[str, float] | None]:
        opts: list[tuple[str, float] | None] = []
        if self.include_defect_free or not self.defects:
            opts.append(None)
        for loc, pdefs in self.defects:
            opts.extend((loc, float(p)) for p in pdefs)
        return opts

    def to_dict(self) -> dict:
        out = asdict(self)
        out["defects"] = [{"location": loc, "p_def": list(p)} for loc, p in self.defects]
        return out


@dataclass(frozen=True)
class SweepPoint:
    d: int
    noise_kind: str
    p: float
    p_sigma: float
    defect_loc: str
    p_def: float | None
    draw_id: int
    shots: int
    rounds: int
    errors: int
    seed: int

    @property
    def epsilon_round(self) -> float:
        return self.errors / (self.shots * self.rounds)

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.errors, self.shots, self.rounds)

    def series_key(self) -> tuple:
        return (self.d, self.noise_kind, self.p_sigma, self.defect_loc, self.p_def)

    def csv_row(self) -> list[str]:
        lo, hi = self.ci
        return [str(self.d), self.noise_kind, _num(self.p), _num(self.p_sigma), self.defect_loc,
                "" if self.p_def is None else _num(self.p_def), str(self.draw_id), str(self.shots),
                str(self.rounds), str(self.errors), _num(self.epsilon_round), _num(lo), _num(hi),
                str(self.seed)]


def _num(v: float) -> str:
    return repr(float(v))


def wilson_interval(errors: int, shots: int, rounds: int = 1, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(int(errors), int(shots)).proportion_ci(confidence_level=confidence, method="wilson")
    return max(0.0, float(ci.low) / rounds), min(1.0, float(ci.high) / rounds)


def point_seed(base_seed: int, index: int) -> int:
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _sub_seed(seed: int, purpose: int) -> int:
    # Distinct streams for the profile draw and the shot sampler.
    ss = np.random.SeedSequence(seed, spawn_key=(purpose,))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class _Task:
    index: int
    d: int
    noise_kind: str
    p: float
    p_sigma: float
    defect: tuple[str, float] | None
    draw_id: int
    shots: int
    rounds: int
    seed: int


def grid(config: SweepConfig) -> list[_Task]:
    """Every (d, defect, p_sigma, p, draw) combination in a fixed order."""
    tasks = []
    draws = config.draws if config.noise == HETEROGENEOUS else 1
    for d in config.distances:
        for defect in config.defect_options():
            for sigma in config.p_sigmas:
                for p in config.p_values:
                    for draw in range(draws):
                        i = len(tasks)
                        tasks.append(_Task(i, d, config.noise, float(p), float(sigma), defect, draw,
                                           config.shots, config.rounds, point_seed(config.seed, i)))
    return tasks


def build_point_circuit(task: _Task):
    lattice = build_lattice(task.d)
    if task.noise_kind == HOMOGENEOUS:
        profile = homogeneous_profile(lattice, task.p)
    else:
        profile = heterogeneous_profile(lattice, task.p, task.p_sigma, _sub_seed(task.seed, 0))
    if task.defect is not None:
        loc, p_def = task.defect
        profile = apply_defects(profile, lattice, [(parse_location(loc), p_def)])
    return build_memory_circuit(lattice, profile, task.rounds), profile


def count_logical_errors(circuit, shots: int, seed: int) -> int:
    matcher = Matcher(matching_graph_for(circuit))
    cols = matcher.nodes
    errors = 0
    for dets, obs in iter_blocks(circuit, shots, seed):
        preds = matcher.decode_rows(dets[:, cols])
        errors += int(np.count_nonzero(preds != obs[:, 0]))
    return errors


def run_point(task: _Task) -> SweepPoint:
    try:
        circuit, _ = build_point_circuit(task)
        with warnings.catch_warnings():
            # High defect rates legitimately clamp edges; the sweep should not spam.
            warnings.simplefilter("ignore", UserWarning)
            errors = count_logical_errors(circuit, task.shots, _sub_seed(task.seed, 1))
    except Exception as exc:
        raise ExperimentError(f"point {task.index} (d={task.d}, p={task.p}, p_sigma={task.p_sigma}, "
                              f"defect={task.defect}, draw={task.draw_id}): {exc}") from exc
    loc, p_def = task.defect if task.defect else ("", None)
    return SweepPoint(task.d, task.noise_kind, task.p, task.p_sigma, loc, p_def, task.draw_id,
                      task.shots, task.rounds, errors, task.seed)


def run_sweep(config: SweepConfig, workers: int = 1, progress=None) -> list[SweepPoint]:
    """Run every grid point; results come back in grid order whatever ``workers`` is."""
    config.validate()
    tasks = grid(config)
    if workers <= 1 or len(tasks) == 1:
        out = []
        for t in tasks:
            out.append(run_point(t))
            if progress:
                progress(out[-1])
        return out
    with cf.ProcessPoolExecutor(max_workers=workers) as pool:
        out = []
        for pt in pool.map(run_point, tasks):
            out.append(pt)
            if progress:
                progress(pt)
        return out


# --- aggregation ---------------------------------------------------------

@dataclass(frozen=True)
class PooledPoint:
    d: int
    noise_kind: str
    p: float
    p_sigma: float
    defect_loc: str
    p_def: float | None
    draws: int
    shots: int
    rounds: int
    errors: int

    @property
    def epsilon_round(self) -> float:
        return self.errors / (self.shots * self.rounds)

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.errors, self.shots, self.rounds)

    def series_key(self) -> tuple:
        return (self.d, self.noise_kind, self.p_sigma, self.defect_loc, self.p_def)

    def to_dict(self) -> dict:
        lo, hi = self.ci
        return {"d": self.d, "noise_kind": self.noise_kind, "p_or_pmu": self.p, "p_sigma": self.p_sigma,
                "defect_loc": self.defect_loc, "p_def": self.p_def, "draws": self.draws,
                "shots": self.shots, "rounds": self.rounds, "errors": self.errors,
                "eps_round": self.epsilon_round, "ci_lo": lo, "ci_hi": hi}


def pool_draws(points: Iterable[SweepPoint]) -> list[PooledPoint]:
    """Merge the repeated draws of each (series, noise value) into one estimate."""
    groups: dict[tuple, list[SweepPoint]] = {}
    for pt in points:
        groups.setdefault(pt.series_key() + (pt.p,), []).append(pt)
    out = []
    for key in sorted(groups, key=_sort_key):
        pts = groups[key]
        rounds = {p.rounds for p in pts}
        if len(rounds) != 1:
            raise ExperimentError(f"cannot pool points with different round counts {sorted(rounds)}")
        d, kind, sigma, loc, p_def, p = key
        out.append(PooledPoint(d, kind, p, sigma, loc, p_def, len(pts), sum(q.shots for q in pts),
                               rounds.pop(), sum(q.errors for q in pts)))
    return out


def _sort_key(key: tuple) -> tuple:
    return tuple((0, 0.0) if v is None else (1, v) for v in key)


def series(points: Iterable) -> dict[tuple, list]:
    """Group points by curve (d, kind, p_sigma, defect) with each curve sorted by noise value."""
    out: dict[tuple, list] = {}
    for pt in points:
        out.setdefault(pt.series_key(), []).append(pt)
    return {k: sorted(out[k], key=lambda q: q.p) for k in sorted(out, key=_sort_key)}


# --- BAD crossings -------------------------------------------------------

@dataclass(frozen=True)
class BadBoundary:
    d: int
    axis: str
    crossing: float | None
    scanned: tuple[float, float]
    bracket: tuple[tuple[float, float], ...]
    label: dict = field(default_factory=dict, compare=False)

    @property
    def crossed(self) -> bool:
        return self.crossing is not None

    def to_dict(self) -> dict:
        out = {"d": self.d, "axis": self.axis, **self.label}
        if self.crossed:
            out["status"] = "crossed"
            out["bad"] = self.crossing
        else:
            out["status"] = "not_crossed"
            out["bad"] = None
        out["scanned"] = list(self.scanned)
        out["bracket"] = [list(b) for b in self.bracket]
        return out


def _log_interp(x0: float, e0: float, x1: float, e1: float, target: float) -> float:
    if x0 > 0 and x1 > 0:
        lx0, lx1 = math.log(x0), math.log(x1)
        if e0 > 0 and e1 > 0:
            t = (math.log(target) - math.log(e0)) / (math.log(e1) - math.log(e0))
        else:
            # A zero count has no logarithm; fall back to linear in epsilon.
            t = (target - e0) / (e1 - e0)
        return math.exp(lx0 + t * (lx1 - lx0))
    t = (target - e0) / (e1 - e0)
    return x0 + t * (x1 - x0)


def compute_bad(points: Sequence, epsilon_thr: float = EPSILON_THR, axis: str = "p") -> BadBoundary:
    """First crossing of ``epsilon_thr`` along one distance's curve.

    Points need ``d``, ``p`` (the noise value) and ``epsilon_round``.  A
    point sitting exactly on the threshold is its own crossing; otherwise
    the first adjacent pair on opposite sides is interpolated linearly in
    (log noise, log epsilon).
    """
    if len(points) < 2:
        raise ExperimentError(f"compute_bad needs at least 2 points, got {len(points)}")
    ds = {pt.d for pt in points}
    if len(ds) != 1:
        raise ExperimentError(f"compute_bad expects a single distance, got {sorted(ds)}")
    pts = sorted(points, key=lambda q: q.p)
    xs = [float(q.p) for q in pts]
    es = [float(q.epsilon_round) for q in pts]
    if len(set(xs)) != len(xs):
        raise ExperimentError("compute_bad got repeated noise values; pool draws first")
    d = ds.pop()
    scanned = (xs[0], xs[-1])
    for i in range(len(pts)):
        if es[i] == epsilon_thr:
            return BadBoundary(d, axis, xs[i], scanned, ((xs[i], es[i]),))
        if i + 1 < len(pts) and (es[i] - epsilon_thr) * (es[i + 1] - epsilon_thr) < 0:
            x = _log_interp(xs[i], es[i], xs[i + 1], es[i + 1], epsilon_thr)
            x = min(max(x, xs[i]), xs[i + 1])
            return BadBoundary(d, axis, x, scanned, ((xs[i], es[i]), (xs[i + 1], es[i + 1])))
    return BadBoundary(d, axis, None, scanned, ())


def bads_for(points: Iterable, epsilon_thr: float = EPSILON_THR) -> list[BadBoundary]:
    """One BadBoundary per curve with at least two noise values."""
    out = []
    for key, pts in series(points).items():
        if len(pts) < 2:
            continue
        d, kind, sigma, loc, p_def = key
        axis = "p_mu" if kind == HETEROGENEOUS else "p"
        bad = compute_bad(pts, epsilon_thr, axis)
        label = {"noise_kind": kind, "p_sigma": sigma, "defect_loc": loc, "p_def": p_def}
        out.append(BadBoundary(bad.d, bad.axis, bad.crossing, bad.scanned, bad.bracket, label))
    return out


# --- scaling fit ---------------------------------------------------------

@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    p: float | None
    p_thr_ref: float
    p_thr_implied: float | None
    distances: tuple[int, ...]
    residuals: tuple[float, ...]


def fit_scaling(points: Sequence, p: float | None = None, p_thr: float = P_THR) -> ScalingFit:
    """Least-squares fit of ln(epsilon) against (d+1)/2 at a fixed physical rate.

    ``points`` are SweepPoints (or anything with ``d``, ``p``,
    ``epsilon_round``) or plain ``(d, epsilon)`` pairs.  The slope estimates
    ln(p/p_thr); with ``p`` known the implied threshold is p/exp(slope).
    """
    pairs = []
    for pt in points:
        if isinstance(pt, tuple):
            pairs.append((int(pt[0]), float(pt[1])))
        else:
            pairs.append((int(pt.d), float(pt.epsilon_round)))
            if p is None:
                p = float(pt.p)
            elif not math.isclose(pt.p, p):
                raise ExperimentError("fit_scaling needs points at one physical rate")
    if p is not None and p >= p_thr:
        raise ExperimentError(f"fit_scaling needs p below threshold ({p} >= {p_thr})")
    zero = [d for d, e in pairs if e <= 0]
    if zero:
        warnings.warn(f"excluding zero-rate points at d={zero} from the scaling fit", stacklevel=2)
    pairs = [(d, e) for d, e in pairs if e > 0]
    if len({d for d, _ in pairs}) < 3:
        raise ExperimentError("fit_scaling needs nonzero rates at >= 3 distinct distances")
    pairs.sort()
    x = np.array([(d + 1) / 2 for d, _ in pairs])
    y = np.log([e for _, e in pairs])
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    implied = p / math.exp(slope) if p is not None else None
    return ScalingFit(float(slope), float(intercept), p, p_thr, implied,
                      tuple(d for d, _ in pairs), tuple(float(r) for r in residuals))


# --- files ---------------------------------------------------------------

def write_csv(points: Iterable[SweepPoint], out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for pt in points:
        w.writerow(pt.csv_row())


def csv_text(points: Iterable[SweepPoint]) -> str:
    buf = io.StringIO()
    write_csv(points, buf)
    return buf.getvalue()


def read_csv(src) -> list[SweepPoint]:
    reader = csv.reader(src)
    try:
        header = next(reader)
    except StopIteration:
        raise ExperimentError("empty CSV") from None
    if tuple(header) != CSV_COLUMNS:
        raise ExperimentError(f"unexpected CSV header {header}; expected {list(CSV_COLUMNS)}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise ExperimentError(f"CSV line {lineno}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        r = dict(zip(CSV_COLUMNS, row))
        try:
            out.append(SweepPoint(int(r["d"]), r["noise_kind"], float(r["p_or_pmu"]), float(r["p_sigma"]),
                                  r["defect_loc"], float(r["p_def"]) if r["p_def"] else None,
                                  int(r["draw_id"]), int(r["shots"]), int(r["rounds"]), int(r["errors"]),
                                  int(r["seed"])))
        except ValueError as exc:
            raise ExperimentError(f"CSV line {lineno}: {exc}") from None
    return out


def summary(points: Sequence[SweepPoint], epsilon_thr: float = EPSILON_THR, config: SweepConfig | None = None) -> dict:
    """JSON-ready summary: pooled estimates and BADs computed on the pooled curves."""
    pooled = pool_draws(points)
    doc = {
        "epsilon_thr": epsilon_thr,
        "bads": [b.to_dict() for b in bads_for(pooled, epsilon_thr)],
        "pooled": [p.to_dict() for p in pooled],
    }
    if config is not None:
        doc["config"] = config.to_dict()
    return doc


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


_CONFIG_KEYS = {"distances", "p", "p_mu", "noise", "p_sigma", "defects", "include_defect_free",
                "rounds", "shots", "epsilon_thr", "seed", "draws"}


def config_from_dict(doc: dict) -> SweepConfig:
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ExperimentError(f"unknown config keys: {sorted(unknown)}")
    if "p" in doc and "p_mu" in doc:
        raise ExperimentError("give either 'p' (homogeneous) or 'p_mu' (heterogeneous), not both")
    noise = doc.get("noise", HETEROGENEOUS if "p_mu" in doc else HOMOGENEOUS)
    values = doc.get("p", doc.get("p_mu"))
    if values is None:
        raise ExperimentError("config needs a 'p' or 'p_mu' list")
    defects = []
    for entry in doc.get("defects", []):
        if not isinstance(entry, dict) or "location" not in entry or "p_def" not in entry:
            raise ExperimentError("each [[defects]] entry needs 'location' and 'p_def'")
        pdefs = entry["p_def"] if isinstance(entry["p_def"], list) else [entry["p_def"]]
        defects.append((str(entry["location"]), [float(v) for v in pdefs]))
    try:
        return SweepConfig(
            distances=[int(d) for d in doc.get("distances", [])],
            p_values=[float(v) for v in _as_list(values)],
            noise=noise,
            p_sigmas=[float(v) for v in _as_list(doc.get("p_sigma", [0.0]))],
            defects=defects,
            include_defect_free=bool(doc.get("include_defect_free", True)),
            rounds=int(doc.get("rounds", 3)),
            shots=int(doc.get("shots", DEFAULT_SHOTS)),
            epsilon_thr=float(doc.get("epsilon_thr", EPSILON_THR)),
            seed=int(doc.get("seed", 0)),
            draws=int(doc.get("draws", DEFAULT_DRAWS)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ExperimentError):
            raise
        raise ExperimentError(f"bad config value: {exc}") from None


def _as_list(v):
    return v if isinstance(v, list) else [v]


def load_config(path) -> SweepConfig:
    with open(path, "rb") as fh:
        try:
            doc = tomli.load(fh)
        except tomli.TOMLDecodeError as exc:
            raise ExperimentError(f"{path}: {exc}") from None
    return config_from_dict(doc)


# --- case presets --------------------------------------------------------

CASE_DISTANCES = [3, 5, 7, 9, 11, 13, 15, 17]
CASE_P_GRID = [float(v) for v in np.geomspace(5e-4, 1e-2, 9)]
CASE_P_DEF = [float(v) for v in np.linspace(0.05, 0.75, 5)]
CASE_P_SIGMA = [0.0] + [float(v) for v in np.linspace(0.006, 0.015, 5)]
CASE4_P_SIGMA = 0.006


def case_config(case: int, shots: int = DEFAULT_SHOTS, seed: int = 0,
                distances: Sequence[int] | None = None, draws: int = DEFAULT_DRAWS) -> SweepConfig:
    ds = list(distances) if distances else list(CASE_DISTANCES)
    common = dict(distances=ds, p_values=list(CASE_P_GRID), shots=shots, seed=seed)
    if case == 1:
        return SweepConfig(**common)
    if case == 2:
        return SweepConfig(**common, defects=[("center data", list(CASE_P_DEF))])
    if case == 3:
        return SweepConfig(**common, noise=HETEROGENEOUS, p_sigmas=list(CASE_P_SIGMA), draws=draws)
    if case == 4:
        return SweepConfig(**common, noise=HETEROGENEOUS, p_sigmas=[CASE4_P_SIGMA],
                           defects=[("center data", list(CASE_P_DEF))], draws=draws)
    raise ExperimentError(f"unknown case {case}; expected 1-4")
