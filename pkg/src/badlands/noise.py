"""Per-qubit physical error rates.

A profile assigns one rate to every qubit of a lattice.  Rates come from a
homogeneous value, a truncated normal draw, or either of those with defect
overrides layered on top.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from .lattice import Coord, Lattice, LocationSpec, format_location

DEFAULT_TWO_QUBIT_SCALE = 1.2


class NoiseError(ValueError):
    pass


def _check_probability(name: str, p: float) -> None:
    if not (isinstance(p, (int, float)) and 0.0 <= p <= 1.0):
        raise NoiseError(f"{name} must be a probability in [0, 1], got {p!r}")


@dataclass(frozen=True)
class NoiseProfile:
    d: int
    rates: tuple[float, ...]
    two_qubit_scale: float = DEFAULT_TWO_QUBIT_SCALE
    provenance: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for p in self.rates:
            _check_probability("rate", p)
        if self.two_qubit_scale < 1:
            raise NoiseError(f"two-qubit scale must be >= 1, got {self.two_qubit_scale}")

    def rate(self, index: int) -> float:
        return self.rates[index]

    def check_lattice(self, lattice: Lattice) -> None:
        if lattice.d != self.d or lattice.n != len(self.rates):
            raise NoiseError(
                f"profile for d={self.d} ({len(self.rates)} rates) does not cover "
                f"the d={lattice.d} lattice ({lattice.n} qubits)"
            )

    def to_json(self, lattice: Lattice) -> str:
        self.check_lattice(lattice)
        doc = {
            "d": self.d,
            "s": self.two_qubit_scale,
            "rates": [
                {"x": q.coord.x, "y": q.coord.y, "p": self.rates[q.index]}
                for q in lattice.qubits
            ],
            "provenance": self.provenance,
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, text: str, lattice: Lattice) -> "NoiseProfile":
        doc = json.loads(text)
        if doc["d"] != lattice.d:
            raise NoiseError(f"profile is for d={doc['d']}, lattice has d={lattice.d}")
        rates = [None] * lattice.n
        for entry in doc["rates"]:
            i = lattice.coord_to_index((entry["x"], entry["y"]))
            if rates[i] is not None:
                raise NoiseError(f"duplicate rate for {lattice.index_to_coord(i)}")
            rates[i] = float(entry["p"])
        missing = [lattice.index_to_coord(i) for i, r in enumerate(rates) if r is None]
        if missing:
            raise NoiseError(f"profile has no rate for {missing[0]}")
        return cls(doc["d"], tuple(rates), float(doc["s"]), doc.get("provenance", {}))


def homogeneous_profile(
    lattice: Lattice, p: float, two_qubit_scale: float = DEFAULT_TWO_QUBIT_SCALE
) -> NoiseProfile:
    _check_probability("p", p)
    p = float(p)
    return NoiseProfile(
        lattice.d,
        (p,) * lattice.n,
        two_qubit_scale,
        {"kind": "homogeneous", "p": p, "defects": []},
    )


def truncated_normal_draw(rng: np.random.Generator, mu: float, sigma: float, size: int = 1) -> np.ndarray:
    """Rejection-sample Normal(mu, sigma) restricted to [0, 1]."""
    out = np.empty(size)
    filled = 0
    while filled < size:
        batch = rng.normal(mu, sigma, size=max(8, 2 * (size - filled)))
        ok = batch[(batch >= 0.0) & (batch <= 1.0)]
        take = min(len(ok), size - filled)
        out[filled:filled + take] = ok[:take]
        filled += take
    return out


def qubit_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream per (seed, qubit) so draws do not depend on visit order."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def heterogeneous_profile(
    lattice: Lattice,
    p_mu: float,
    p_sigma: float,
    seed: int,
    two_qubit_scale: float = DEFAULT_TWO_QUBIT_SCALE,
) -> NoiseProfile:
    _check_probability("p_mu", p_mu)
    if not (isinstance(p_sigma, (int, float)) and p_sigma >= 0 and math.isfinite(p_sigma)):
        raise NoiseError(f"p_sigma must be a finite value >= 0, got {p_sigma!r}")
    seed = int(seed)
    if p_sigma == 0:
        rates = (float(p_mu),) * lattice.n
    else:
        rates = tuple(
            float(truncated_normal_draw(qubit_rng(seed, i), p_mu, p_sigma)[0])
            for i in range(lattice.n)
        )
    prov = {"kind": "heterogeneous", "p_mu": float(p_mu), "p_sigma": float(p_sigma),
            "seed": seed, "defects": []}
    return NoiseProfile(lattice.d, rates, two_qubit_scale, prov)


def apply_defects(
    profile: NoiseProfile,
    lattice: Lattice,
    defects: Iterable[tuple[LocationSpec, float]],
) -> NoiseProfile:
    """Overwrite the rate at each defect location with its p_def."""
    profile.check_lattice(lattice)
    defects = list(defects)
    if not defects:
        return profile
    rates = list(profile.rates)
    seen: dict[Coord, LocationSpec] = {}
    overlay = []
    for loc, p_def in defects:
        _check_probability("p_def", p_def)
        coord = lattice.resolve(loc)
        if coord in seen:
            raise NoiseError(f"duplicate defect location {coord} ({seen[coord]!r} and {loc!r})")
        seen[coord] = loc
        rates[lattice.coord_to_index(coord)] = float(p_def)
        overlay.append({"location": format_location(loc), "x": coord.x, "y": coord.y,
                        "p_def": float(p_def)})
    prov = dict(profile.provenance)
    prov["defects"] = list(prov.get("defects", [])) + overlay
    return NoiseProfile(profile.d, tuple(rates), profile.two_qubit_scale, prov)


def two_qubit_rate(p_q1: float, p_q2: float, s: float = DEFAULT_TWO_QUBIT_SCALE) -> float:
    """Depolarizing strength for a CX: the mean of both qubit rates times ``s``, capped at 1."""
    _check_probability("p_q1", p_q1)
    _check_probability("p_q2", p_q2)
    if s < 1:
        raise NoiseError(f"two-qubit scale must be >= 1, got {s}")
    return min(1.0, ((p_q1 + p_q2) / 2) * s)


def rates_array(profile: NoiseProfile) -> np.ndarray:
    return np.asarray(profile.rates, dtype=float)


def describe(profile: NoiseProfile) -> str:
    prov = profile.provenance
    if prov.get("kind") == "heterogeneous":
        base = f"heterogeneous p_mu={prov['p_mu']} p_sigma={prov['p_sigma']} seed={prov['seed']}"
    else:
        base = f"homogeneous p={prov.get('p')}"
    for dfx in prov.get("defects", []):
        base += f" defect@{dfx['location']}={dfx['p_def']}"
    return base

