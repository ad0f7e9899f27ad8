"""Rotated surface-code geometry.

Qubits live on a half-integer grid running from 0.5 to d + 0.5 on both axes.
Data qubits sit at integer coordinates (1..d, 1..d); measure qubits sit at
half-odd coordinates and touch the data qubits at (+-0.5, +-0.5).

Checkerboard convention: the plaquette whose lower-left data corner is
(x, y) is Z-type when x + y is even and X-type otherwise.  Left and right
boundaries carry weight-2 Z plaquettes, top and bottom carry weight-2 X
plaquettes, so logical Z is a horizontal row of data qubits and logical X
is a vertical column.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Union


class LatticeError(ValueError):
    """Raised for invalid distances, coordinates or location keywords."""


class Coord(NamedTuple):
    x: float
    y: float

    @property
    def is_data(self) -> bool:
        return float(self.x).is_integer() and float(self.y).is_integer()

    @property
    def is_measure(self) -> bool:
        return _is_half_odd(self.x) and _is_half_odd(self.y)

    def __str__(self) -> str:
        return f"({_fmt(self.x)}, {_fmt(self.y)})"


class QubitKind(str, enum.Enum):
    DATA = "data"
    MEASURE_X = "measure_x"
    MEASURE_Z = "measure_z"


class Qubit(NamedTuple):
    index: int
    coord: Coord
    kind: QubitKind


# Offsets from a measure qubit to its data neighbours.
NE = (0.5, 0.5)
NW = (-0.5, 0.5)
SE = (0.5, -0.5)
SW = (-0.5, -0.5)

# CX visiting order per stabilizer type.  The last two visits of an X
# ancilla form a horizontal pair and those of a Z ancilla a vertical pair,
# so hook errors run perpendicular to the logical operator they could shorten.
X_SCHEDULE = (NE, NW, SE, SW)
Z_SCHEDULE = (NE, SE, NW, SW)

LOCATION_KEYWORDS = ("center data", "center measure", "edge data", "edge measure")

LocationSpec = Union[str, Coord, tuple]


def _is_half_odd(v: float) -> bool:
    return (2 * v) % 2 == 1


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else str(v)


def _check_distance(d: int) -> None:
    if not isinstance(d, int) or isinstance(d, bool) or d < 3 or d % 2 == 0:
        raise LatticeError(f"distance must be an odd integer >= 3, got {d!r}")


def _plaquette_is_z(x: int, y: int) -> bool:
    return (x + y) % 2 == 0


def _plaquette_present(x: int, y: int, d: int) -> bool:
    """Whether the plaquette with lower-left data corner (x, y) exists."""
    if not (0 <= x <= d and 0 <= y <= d):
        return False
    on_lr = x in (0, d)
    on_tb = y in (0, d)
    if on_lr and on_tb:
        return False
    if on_lr:
        return _plaquette_is_z(x, y)
    if on_tb:
        return not _plaquette_is_z(x, y)
    return True


@dataclass(frozen=True)
class Lattice:
    """A distance-d rotated surface-code patch.

    Qubit indices are assigned row-major over (y, x), so index 0 is the
    lowest-left qubit on the grid.
    """

    d: int
    qubits: tuple[Qubit, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.qubits)

    @cached_property
    def _index_of(self) -> dict[Coord, int]:
        return {q.coord: q.index for q in self.qubits}

    def coord_to_index(self, coord: LocationSpec) -> int:
        c = Coord(float(coord[0]), float(coord[1]))
        try:
            return self._index_of[c]
        except KeyError:
            raise LatticeError(f"coordinate {c} is not on the d={self.d} lattice") from None

    def index_to_coord(self, index: int) -> Coord:
        if not 0 <= index < self.n:
            raise LatticeError(f"qubit index {index} out of range for n={self.n}")
        return self.qubits[index].coord

    def kind(self, index: int) -> QubitKind:
        return self.qubits[index].kind

    def indices(self, *kinds: QubitKind) -> list[int]:
        return [q.index for q in self.qubits if q.kind in kinds]

    @property
    def data_qubits(self) -> list[int]:
        return self.indices(QubitKind.DATA)

    @property
    def measure_x(self) -> list[int]:
        return self.indices(QubitKind.MEASURE_X)

    @property
    def measure_z(self) -> list[int]:
        return self.indices(QubitKind.MEASURE_Z)

    @property
    def measure_qubits(self) -> list[int]:
        return self.indices(QubitKind.MEASURE_X, QubitKind.MEASURE_Z)

    def neighbor(self, ancilla: int, offset: tuple[float, float]) -> int | None:
        """Data qubit at ``offset`` from a measure qubit, or None off the patch."""
        c = self.qubits[ancilla].coord
        idx = self._index_of.get(Coord(c.x + offset[0], c.y + offset[1]))
        return idx

    def stabilizer_support(self, ancilla: int) -> list[int]:
        """Data qubits measured by ``ancilla``, in its CX schedule order."""
        kind = self.qubits[ancilla].kind
        if kind is QubitKind.DATA:
            raise LatticeError(f"qubit {ancilla} is a data qubit")
        schedule = X_SCHEDULE if kind is QubitKind.MEASURE_X else Z_SCHEDULE
        out = []
        for off in schedule:
            q = self.neighbor(ancilla, off)
            if q is not None:
                out.append(q)
        return out

    @property
    def logical_z_row(self) -> list[int]:
        """Data qubits of the bottom row; their Z product is the logical Z."""
        return [self.coord_to_index((x, 1)) for x in range(1, self.d + 1)]

    def resolve(self, spec: LocationSpec) -> Coord:
        return resolve_location(spec, self.d)


def build_lattice(d: int) -> Lattice:
    _check_distance(d)
    qubits: list[tuple[Coord, QubitKind]] = []
    # Half-unit grid 1..2d+1 maps to coordinates 0.5..d+0.5.
    for hy in range(1, 2 * d + 2):
        for hx in range(1, 2 * d + 2):
            if hx % 2 == 0 and hy % 2 == 0:
                qubits.append((Coord(hx / 2, hy / 2), QubitKind.DATA))
            elif hx % 2 == 1 and hy % 2 == 1:
                x, y = (hx - 1) // 2, (hy - 1) // 2
                if _plaquette_present(x, y, d):
                    kind = QubitKind.MEASURE_Z if _plaquette_is_z(x, y) else QubitKind.MEASURE_X
                    qubits.append((Coord(hx / 2, hy / 2), kind))
    return Lattice(d, tuple(Qubit(i, c, k) for i, (c, k) in enumerate(qubits)))


def resolve_location(spec: LocationSpec, d: int) -> Coord:
    """Turn a location keyword or explicit coordinate into a lattice coordinate.

    ``"edge measure"`` prefers the boundary plaquette just above the left
    midpoint and falls back to the one just below when the checkerboard puts
    an X plaquette (absent on that side) there.
    """
    _check_distance(d)
    mid = (d + 1) // 2
    if isinstance(spec, str):
        key = " ".join(spec.strip().lower().replace("_", " ").replace("-", " ").split())
        if key == "center data":
            return Coord(float(mid), float(mid))
        if key == "center measure":
            return Coord(mid + 0.5, mid + 0.5)
        if key == "edge data":
            return Coord(1.0, float(mid))
        if key == "edge measure":
            for y in (mid, mid - 1):
                if _plaquette_present(0, y, d):
                    return Coord(0.5, y + 0.5)
            raise AssertionError("unreachable: left boundary always has a plaquette near its midpoint")
        raise LatticeError(f"unknown location keyword {spec!r}; expected one of {LOCATION_KEYWORDS}")
    try:
        c = Coord(float(spec[0]), float(spec[1]))
    except (TypeError, ValueError, IndexError):
        raise LatticeError(f"cannot interpret {spec!r} as a location") from None
    if not (c.is_data or c.is_measure):
        raise LatticeError(f"coordinate {c} has mixed parity; neither data nor measure")
    if not (0.5 <= c.x <= d + 0.5 and 0.5 <= c.y <= d + 0.5):
        raise LatticeError(f"coordinate {c} lies outside the d={d} grid")
    if c.is_data:
        if not (1 <= c.x <= d and 1 <= c.y <= d):
            raise LatticeError(f"coordinate {c} lies outside the d={d} grid")
    elif not _plaquette_present(int(c.x - 0.5), int(c.y - 0.5), d):
        raise LatticeError(f"no measure qubit at {c} on the d={d} lattice")
    return c


def format_location(spec: LocationSpec) -> str:
    if isinstance(spec, str):
        return spec
    return f"{_fmt(spec[0])},{_fmt(spec[1])}"


def parse_location(text: str) -> LocationSpec:
    """Parse ``"center data"`` or ``"x,y"`` as written on the command line."""
    text = text.strip()
    if "," in text:
        xs, ys = text.strip("()").split(",", 1)
        try:
            return Coord(float(xs), float(ys))
        except ValueError:
            raise LatticeError(f"cannot parse coordinate {text!r}") from None
    return text
