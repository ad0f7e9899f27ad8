"""Noisy Z-memory stabilizer circuits and their text form.

The text form is the usual stabilizer-circuit line format (``CX 0 1``,
``DEPOLARIZE2(0.0012) 3 7``, ``DETECTOR(1.5, 0.5, 0) rec[-1] rec[-9]``),
restricted to the instructions this package emits.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .lattice import X_SCHEDULE, Z_SCHEDULE, Lattice, QubitKind, build_lattice
from .noise import NoiseProfile, two_qubit_rate

GATES = {"R", "H", "CX", "M", "MR"}
NOISE = {"DEPOLARIZE1", "DEPOLARIZE2", "X_ERROR"}
ANNOTATIONS = {"TICK", "QUBIT_COORDS", "DETECTOR", "OBSERVABLE_INCLUDE"}
MNEMONICS = GATES | NOISE | ANNOTATIONS
ALIASES = {"X-ERROR": "X_ERROR", "CNOT": "CX"}
MEASURING = {"M", "MR"}
TWO_QUBIT = {"CX", "DEPOLARIZE2"}


class CircuitError(ValueError):
    pass


class CircuitParseError(CircuitError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Instruction:
    """One circuit line.

    For DETECTOR and OBSERVABLE_INCLUDE, ``targets`` holds measurement-record
    lookbacks: ``k`` stands for ``rec[-k]``.
    """

    name: str
    targets: tuple[int, ...] = ()
    args: tuple[float, ...] = ()

    @property
    def is_noise(self) -> bool:
        return self.name in NOISE

    @property
    def probability(self) -> float:
        return self.args[0]

    def target_groups(self) -> list[tuple[int, ...]]:
        if self.name in TWO_QUBIT:
            return [self.targets[i:i + 2] for i in range(0, len(self.targets), 2)]
        return [(t,) for t in self.targets]

    def to_text(self) -> str:
        head = self.name
        if self.args:
            head += "(" + ", ".join(_fmt_num(a) for a in self.args) + ")"
        if self.name in ("DETECTOR", "OBSERVABLE_INCLUDE"):
            body = [f"rec[-{k}]" for k in self.targets]
        else:
            body = [str(t) for t in self.targets]
        return " ".join([head, *body])


def _fmt_num(v: float) -> str:
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


@dataclass(frozen=True)
class Circuit:
    instructions: tuple[Instruction, ...]
    d: int
    rounds: int
    num_qubits: int = field(init=False)
    num_measurements: int = field(init=False)
    num_detectors: int = field(init=False)
    num_observables: int = field(init=False)

    def __post_init__(self):
        n_q = 0
        n_m = 0
        n_det = 0
        n_obs = 0
        for ins in self.instructions:
            if ins.name in ("DETECTOR", "OBSERVABLE_INCLUDE"):
                for k in ins.targets:
                    if k < 1 or k > n_m:
                        raise CircuitError(f"{ins.to_text()!r} refers to a measurement that does not exist")
                if ins.name == "DETECTOR":
                    n_det += 1
                else:
                    n_obs = max(n_obs, int(ins.args[0]) + 1)
                continue
            if ins.targets:
                n_q = max(n_q, max(ins.targets) + 1)
            if ins.name in MEASURING:
                n_m += len(ins.targets)
            if ins.is_noise and not 0.0 <= ins.probability <= 1.0:
                raise CircuitError(f"noise probability out of range in {ins.to_text()!r}")
            if ins.name in TWO_QUBIT and len(ins.targets) % 2:
                raise CircuitError(f"{ins.name} needs an even number of targets")
        object.__setattr__(self, "num_qubits", n_q)
        object.__setattr__(self, "num_measurements", n_m)
        object.__setattr__(self, "num_detectors", n_det)
        object.__setattr__(self, "num_observables", n_obs)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.d, self.rounds, self.instructions) == (other.d, other.rounds, other.instructions)

    def __hash__(self):
        return hash((self.d, self.rounds, self.instructions))

    @cached_property
    def lattice(self) -> Lattice:
        return build_lattice(self.d)

    @cached_property
    def measurement_qubits(self) -> list[int]:
        """Qubit measured by each entry of the measurement record."""
        out = []
        for ins in self.instructions:
            if ins.name in MEASURING:
                out.extend(ins.targets)
        return out

    @cached_property
    def detector_records(self) -> list[list[int]]:
        """Absolute measurement indices XORed by each detector."""
        out = []
        n_m = 0
        for ins in self.instructions:
            if ins.name in MEASURING:
                n_m += len(ins.targets)
            elif ins.name == "DETECTOR":
                out.append([n_m - k for k in ins.targets])
        return out

    @cached_property
    def observable_records(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_observables)]
        n_m = 0
        for ins in self.instructions:
            if ins.name in MEASURING:
                n_m += len(ins.targets)
            elif ins.name == "OBSERVABLE_INCLUDE":
                out[int(ins.args[0])].extend(n_m - k for k in ins.targets)
        return out

    @cached_property
    def detector_coords(self) -> list[tuple[float, ...]]:
        return [ins.args for ins in self.instructions if ins.name == "DETECTOR"]

    @cached_property
    def z_detectors(self) -> list[int]:
        """Detectors built only from Z-ancilla and data measurements.

        These are the detectors that see X errors, i.e. the ones that carry
        information about a logical-Z memory.
        """
        lat = self.lattice
        meas_q = self.measurement_qubits
        out = []
        for det, recs in enumerate(self.detector_records):
            if all(lat.kind(meas_q[m]) is not QubitKind.MEASURE_X for m in recs):
                out.append(det)
        return out

    def noise_channels(self) -> list[tuple[int, str, float, tuple[int, ...]]]:
        """(instruction index, channel name, probability, targets) per noisy target group."""
        out = []
        for i, ins in enumerate(self.instructions):
            if ins.is_noise:
                for grp in ins.target_groups():
                    out.append((i, ins.name, ins.probability, grp))
        return out


def _noise_runs(name: str, items: Sequence[tuple[tuple[int, ...], float]]) -> list[Instruction]:
    """Group consecutive targets that share a probability into one instruction."""
    out: list[Instruction] = []
    cur_p = None
    cur_t: list[int] = []
    for grp, p in items:
        if cur_t and p != cur_p:
            out.append(Instruction(name, tuple(cur_t), (cur_p,)))
            cur_t = []
        cur_p = p
        cur_t.extend(grp)
    if cur_t:
        out.append(Instruction(name, tuple(cur_t), (cur_p,)))
    return out


def build_memory_circuit(lattice: Lattice, profile: NoiseProfile, rounds: int = 3) -> Circuit:
    """Z-basis memory experiment with per-qubit noise.

    Noise sits directly before the element it afflicts: DEPOLARIZE1 before
    each Hadamard, DEPOLARIZE2 before each CX, X_ERROR before each
    measurement.  Initial resets are followed by X_ERROR.
    """
    if not isinstance(rounds, int) or rounds < 1:
        raise CircuitError(f"rounds must be an integer >= 1, got {rounds!r}")
    profile.check_lattice(lattice)
    p = profile.rates
    s = profile.two_qubit_scale

    all_q = list(range(lattice.n))
    data = lattice.data_qubits
    mx = lattice.measure_x
    anc = lattice.measure_qubits
    z_anc = set(lattice.measure_z)

    ins: list[Instruction] = []
    for q in lattice.qubits:
        ins.append(Instruction("QUBIT_COORDS", (q.index,), (q.coord.x, q.coord.y)))
    ins.append(Instruction("R", tuple(all_q)))
    ins += _noise_runs("X_ERROR", [((q,), p[q]) for q in all_q])
    ins.append(Instruction("TICK"))

    layers: list[list[tuple[int, int]]] = [[] for _ in range(4)]
    for a in anc:
        kind = lattice.kind(a)
        schedule = X_SCHEDULE if kind is QubitKind.MEASURE_X else Z_SCHEDULE
        for step, off in enumerate(schedule):
            dq = lattice.neighbor(a, off)
            if dq is None:
                continue
            layers[step].append((a, dq) if kind is QubitKind.MEASURE_X else (dq, a))

    n_meas = 0
    prev_round: dict[int, int] = {}
    for r in range(rounds):
        ins += _noise_runs("DEPOLARIZE1", [((q,), p[q]) for q in mx])
        ins.append(Instruction("H", tuple(mx)))
        ins.append(Instruction("TICK"))
        for pairs in layers:
            ins += _noise_runs("DEPOLARIZE2", [((c, t), two_qubit_rate(p[c], p[t], s)) for c, t in pairs])
            ins.append(Instruction("CX", tuple(q for pair in pairs for q in pair)))
            ins.append(Instruction("TICK"))
        ins += _noise_runs("DEPOLARIZE1", [((q,), p[q]) for q in mx])
        ins.append(Instruction("H", tuple(mx)))
        ins.append(Instruction("TICK"))
        ins += _noise_runs("X_ERROR", [((q,), p[q]) for q in anc])
        ins.append(Instruction("MR", tuple(anc)))
        this_round = {a: n_meas + i for i, a in enumerate(anc)}
        n_meas += len(anc)
        for a in anc:
            c = lattice.index_to_coord(a)
            if r == 0:
                if a in z_anc:
                    ins.append(Instruction("DETECTOR", (n_meas - this_round[a],), (c.x, c.y, 0)))
            else:
                ins.append(Instruction(
                    "DETECTOR",
                    (n_meas - this_round[a], n_meas - prev_round[a]),
                    (c.x, c.y, r),
                ))
        prev_round = this_round
        ins.append(Instruction("TICK"))

    ins += _noise_runs("X_ERROR", [((q,), p[q]) for q in data])
    ins.append(Instruction("M", tuple(data)))
    data_meas = {q: n_meas + i for i, q in enumerate(data)}
    n_meas += len(data)
    for a in lattice.measure_z:
        c = lattice.index_to_coord(a)
        recs = [data_meas[q] for q in lattice.stabilizer_support(a)] + [prev_round[a]]
        ins.append(Instruction("DETECTOR", tuple(n_meas - m for m in recs), (c.x, c.y, rounds)))
    ins.append(Instruction(
        "OBSERVABLE_INCLUDE",
        tuple(n_meas - data_meas[q] for q in lattice.logical_z_row),
        (0,),
    ))
    return Circuit(tuple(ins), lattice.d, rounds)


def serialize(circuit: Circuit) -> str:
    return "".join(ins.to_text() + "\n" for ins in circuit.instructions)


_LINE = re.compile(r"^([A-Za-z_][A-Za-z0-9_\-]*)\s*(?:\(([^)]*)\))?\s*(.*)$")
_REC = re.compile(r"^rec\[-(\d+)\]$")


def parse(text: str) -> Circuit:
    """Parse circuit text; distance and rounds are recovered from its structure."""
    instructions: list[Instruction] = []
    n_meas = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise CircuitParseError(lineno, f"cannot parse {raw!r}")
        name = m.group(1).upper()
        name = ALIASES.get(name, name)
        if name not in MNEMONICS:
            raise CircuitParseError(lineno, f"unknown instruction {m.group(1)!r}")
        args: tuple[float, ...] = ()
        if m.group(2) is not None and m.group(2).strip():
            try:
                args = tuple(float(a) for a in m.group(2).split(","))
            except ValueError:
                raise CircuitParseError(lineno, f"malformed argument list ({m.group(2)})") from None
            if any(not math.isfinite(a) for a in args):
                raise CircuitParseError(lineno, f"non-finite argument in ({m.group(2)})")
        tokens = m.group(3).split()
        if name in ("DETECTOR", "OBSERVABLE_INCLUDE"):
            targets = []
            for tok in tokens:
                rm = _REC.match(tok)
                if not rm:
                    raise CircuitParseError(lineno, f"expected rec[-k], got {tok!r}")
                k = int(rm.group(1))
                if k < 1 or k > n_meas:
                    raise CircuitParseError(lineno, f"dangling reference {tok} ({n_meas} measurements so far)")
                targets.append(k)
            if name == "OBSERVABLE_INCLUDE" and len(args) != 1:
                raise CircuitParseError(lineno, "OBSERVABLE_INCLUDE needs one index argument")
        else:
            try:
                targets = [int(t) for t in tokens]
            except ValueError:
                raise CircuitParseError(lineno, f"non-integer qubit target in {raw!r}") from None
            if any(t < 0 for t in targets):
                raise CircuitParseError(lineno, "negative qubit target")
        if name in NOISE:
            if len(args) != 1 or not 0.0 <= args[0] <= 1.0:
                raise CircuitParseError(lineno, f"malformed probability for {name}: ({m.group(2)})")
        if name in TWO_QUBIT and len(targets) % 2:
            raise CircuitParseError(lineno, f"{name} needs target pairs")
        if name in MEASURING:
            n_meas += len(targets)
        instructions.append(Instruction(name, tuple(targets), args))

    n_q = 1 + max((t for ins in instructions if ins.name not in ("DETECTOR", "OBSERVABLE_INCLUDE")
                   for t in ins.targets), default=-1)
    d = math.isqrt((n_q + 1) // 2)
    if 2 * d * d - 1 != n_q or d < 3 or d % 2 == 0:
        raise CircuitError(f"{n_q} qubits is not a rotated surface-code patch")
    rounds = sum(1 for ins in instructions if ins.name == "MR")
    return Circuit(tuple(instructions), d, rounds)


def iter_noise_targets(circuit: Circuit, qubit: int) -> Iterable[tuple[Instruction, tuple[int, ...]]]:
    """Noise target groups of ``circuit`` that touch ``qubit``."""
    for ins in circuit.instructions:
        if ins.is_noise:
            for grp in ins.target_groups():
                if qubit in grp:
                    yield ins, grp
