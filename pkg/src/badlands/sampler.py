"""Bit-packed Pauli-frame simulation.

Each qubit carries two rows of 64-bit words (X part and Z part of the error
frame); bit ``s`` of a row belongs to shot ``s``.  Cliffords act on whole
rows, noise flips individual bits, and measurement records copy the X row.

Monte Carlo randomness is drawn per block of ``BLOCK_SHOTS`` shots from a
Philox stream keyed by (seed, block index), so output depends only on
(seed, shots) and never on how blocks are spread over workers.
"""

from __future__ import annotations

import concurrent.futures as cf
from dataclasses import dataclass
from functools import lru_cache
from typing import BinaryIO, Iterable, Iterator, Sequence, TextIO

import numpy as np

from .circuit import Circuit

BLOCK_SHOTS = 1 << 14
# Channels at or above this probability are sampled densely.
DENSE_P = 0.05

DEP1, DEP2, XERR = 0, 1, 2
_KIND = {"DEPOLARIZE1": DEP1, "DEPOLARIZE2": DEP2, "X_ERROR": XERR}
_ONE_QUBIT_PAULI = {"X": 1, "Z": 2, "Y": 3}
_PAULI_CHAR = {0: "I", 1: "X", 2: "Z", 3: "Y"}


class SamplerError(ValueError):
    pass


@dataclass(frozen=True)
class FaultLocation:
    """One Pauli term of one noise channel.

    ``pauli`` is ``"X"``/``"Y"``/``"Z"`` for single-qubit channels and a
    two-letter string such as ``"XI"`` or ``"ZY"`` for DEPOLARIZE2.
    """

    instruction: int
    group: int
    pauli: str


@dataclass
class DetectionSample:
    detectors: np.ndarray  # (shots, num_detectors) bool
    observables: np.ndarray  # (shots, num_observables) bool

    @property
    def shots(self) -> int:
        return self.detectors.shape[0]


@dataclass(frozen=True)
class Program:
    """Circuit lowered to array form for the frame simulator."""

    num_qubits: int
    num_measurements: int
    ops: tuple
    chan_kind: np.ndarray
    chan_p: np.ndarray
    chan_q1: np.ndarray
    chan_q2: np.ndarray
    chan_instruction: np.ndarray
    chan_group: np.ndarray
    det_refs: np.ndarray  # (D, k) padded with num_measurements
    obs_refs: np.ndarray  # (O, k) padded likewise


def _pad_refs(groups: Sequence[Sequence[int]], pad: int) -> np.ndarray:
    width = max((len(g) for g in groups), default=0)
    out = np.full((len(groups), max(width, 1)), pad, dtype=np.int64)
    for i, g in enumerate(groups):
        out[i, :len(g)] = g
    return out


@lru_cache(maxsize=16)
def compile_circuit(circuit: Circuit) -> Program:
    ops = []
    kinds, ps, q1s, q2s, inss, grps = [], [], [], [], [], []
    n_m = 0
    for i, ins in enumerate(circuit.instructions):
        name = ins.name
        if ins.is_noise:
            c0 = len(kinds)
            for g, grp in enumerate(ins.target_groups()):
                kinds.append(_KIND[name])
                ps.append(ins.probability)
                q1s.append(grp[0])
                q2s.append(grp[1] if len(grp) == 2 else -1)
                inss.append(i)
                grps.append(g)
            ops.append(("noise", c0, len(kinds)))
            continue
        t = np.asarray(ins.targets, dtype=np.int64)
        if name in ("R", "H", "M", "MR", "CX") and len(set(ins.targets)) != len(ins.targets):
            raise SamplerError(f"instruction {i} ({name}) repeats a qubit; split it into layers")
        if name == "CX":
            ops.append(("CX", t[0::2], t[1::2]))
        elif name in ("R", "H"):
            ops.append((name, t))
        elif name in ("M", "MR"):
            ops.append((name, t, n_m))
            n_m += len(t)
    return Program(
        num_qubits=circuit.num_qubits,
        num_measurements=n_m,
        ops=tuple(ops),
        chan_kind=np.asarray(kinds, dtype=np.int8),
        chan_p=np.asarray(ps, dtype=float),
        chan_q1=np.asarray(q1s, dtype=np.int64),
        chan_q2=np.asarray(q2s, dtype=np.int64),
        chan_instruction=np.asarray(inss, dtype=np.int64),
        chan_group=np.asarray(grps, dtype=np.int64),
        det_refs=_pad_refs(circuit.detector_records, n_m),
        obs_refs=_pad_refs(circuit.observable_records, n_m),
    )


def _apply_hits(x, z, prog: Program, ch, shot, code):
    words = shot >> 6
    bits = np.left_shift(np.uint64(1), (shot & 63).astype(np.uint64))
    kind = prog.chan_kind[ch]
    q1 = prog.chan_q1[ch]
    q2 = prog.chan_q2[ch]
    two = kind == DEP2
    for frame, bit_1, bit_2 in ((x, 0, 2), (z, 1, 3)):
        f1 = ((code >> bit_1) & 1).astype(bool)
        f2 = two & ((code >> bit_2) & 1).astype(bool)
        qs = np.concatenate([q1[f1], q2[f2]])
        if len(qs):
            np.bitwise_xor.at(frame, (qs, np.concatenate([words[f1], words[f2]])),
                              np.concatenate([bits[f1], bits[f2]]))


def simulate(prog: Program, n_shots: int, ch: np.ndarray, shot: np.ndarray, code: np.ndarray):
    """Propagate the given Pauli hits; returns (detectors, observables) as packed rows.

    ``ch``/``shot``/``code`` list every noise event: channel id, column and
    Pauli code (bit 0 = X on first qubit, bit 1 = Z on first, bits 2/3 the
    same for the second qubit).  They must be sorted by channel.
    """
    n_words = (n_shots + 63) >> 6
    x = np.zeros((prog.num_qubits, n_words), dtype=np.uint64)
    z = np.zeros_like(x)
    rec = np.zeros((prog.num_measurements + 1, n_words), dtype=np.uint64)
    for op in prog.ops:
        tag = op[0]
        if tag == "noise":
            lo, hi = np.searchsorted(ch, [op[1], op[2]])
            if hi > lo:
                _apply_hits(x, z, prog, ch[lo:hi], shot[lo:hi], code[lo:hi])
        elif tag == "CX":
            c, t = op[1], op[2]
            x[t] ^= x[c]
            z[c] ^= z[t]
        elif tag == "H":
            q = op[1]
            tmp = x[q]
            x[q] = z[q]
            z[q] = tmp
        elif tag == "R":
            x[op[1]] = 0
            z[op[1]] = 0
        else:
            q, m0 = op[1], op[2]
            rec[m0:m0 + len(q)] = x[q]
            if tag == "MR":
                x[q] = 0
                z[q] = 0
    dets = np.bitwise_xor.reduce(rec[prog.det_refs], axis=1) if len(prog.det_refs) else rec[:0]
    obs = np.bitwise_xor.reduce(rec[prog.obs_refs], axis=1)
    return dets, obs


def unpack(rows: np.ndarray, n_shots: int) -> np.ndarray:
    """Packed (k, words) rows to a (n_shots, k) bool matrix."""
    if rows.shape[0] == 0:
        return np.zeros((n_shots, 0), dtype=bool)
    as_bytes = np.ascontiguousarray(rows.astype("<u8")).view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :n_shots]
    return np.ascontiguousarray(bits.T).astype(bool)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(block,))))


def _unique_positions(rng: np.random.Generator, ch: np.ndarray, n: int) -> np.ndarray:
    """One uniformly random position in [0, n) per entry, distinct within each channel."""
    pos = rng.integers(0, n, size=len(ch))
    while True:
        key = ch * n + pos
        order = np.argsort(key, kind="stable")
        dup = np.zeros(len(key), dtype=bool)
        dup[order[1:]] = key[order[1:]] == key[order[:-1]]
        if not dup.any():
            return pos
        pos[dup] = rng.integers(0, n, size=int(dup.sum()))


def random_hits(prog: Program, n_shots: int, rng: np.random.Generator):
    """Draw every noise event for ``n_shots`` shots, sorted by channel."""
    p = prog.chan_p
    dense = np.flatnonzero(p >= DENSE_P)
    sparse = np.flatnonzero((p > 0) & (p < DENSE_P))

    counts = rng.binomial(n_shots, p[sparse])
    sp_ch = np.repeat(sparse, counts)
    sp_shot = _unique_positions(rng, sp_ch, n_shots) if len(sp_ch) else sp_ch

    if len(dense):
        mask = rng.random((len(dense), n_shots)) < p[dense][:, None]
        rows, cols = np.nonzero(mask)
        de_ch, de_shot = dense[rows], cols
    else:
        de_ch = de_shot = np.zeros(0, dtype=np.int64)

    ch = np.concatenate([sp_ch, de_ch]).astype(np.int64)
    shot = np.concatenate([sp_shot, de_shot]).astype(np.int64)
    order = np.lexsort((shot, ch))
    ch, shot = ch[order], shot[order]

    kind = prog.chan_kind[ch]
    code = np.ones(len(ch), dtype=np.int64)
    m1 = kind == DEP1
    m2 = kind == DEP2
    code[m1] = rng.integers(1, 4, size=int(m1.sum()))
    code[m2] = rng.integers(1, 16, size=int(m2.sum()))
    return ch, shot, code


def _block_spans(shots: int) -> list[tuple[int, int]]:
    return [(b, min(BLOCK_SHOTS, shots - b * BLOCK_SHOTS))
            for b in range((shots + BLOCK_SHOTS - 1) // BLOCK_SHOTS)]


def _sample_block(prog: Program, seed: int, block: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    rng = block_rng(seed, block)
    dets, obs = simulate(prog, n, *random_hits(prog, n, rng))
    return unpack(dets, n), unpack(obs, n)


def iter_blocks(circuit: Circuit, shots: int, seed: int, workers: int = 1) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield (detectors, observables) bool matrices block by block, in shot order."""
    if shots < 1:
        raise SamplerError(f"shots must be >= 1, got {shots}")
    prog = compile_circuit(circuit)
    spans = _block_spans(shots)
    if workers <= 1 or len(spans) == 1:
        for b, n in spans:
            yield _sample_block(prog, seed, b, n)
        return
    with cf.ProcessPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(_sample_block, prog, seed, b, n) for b, n in spans]
        for f in futs:
            yield f.result()


def sample(circuit: Circuit, shots: int, seed: int, workers: int = 1) -> DetectionSample:
    parts = list(iter_blocks(circuit, shots, seed, workers))
    return DetectionSample(
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
    )


def pauli_code(pauli: str) -> int:
    if len(pauli) == 1:
        return _ONE_QUBIT_PAULI[pauli]
    a, b = pauli
    return (0 if a == "I" else _ONE_QUBIT_PAULI[a]) | ((0 if b == "I" else _ONE_QUBIT_PAULI[b]) << 2)


def pauli_name(kind: int, code: int) -> str:
    if kind == DEP2:
        return _PAULI_CHAR[code & 3] + _PAULI_CHAR[code >> 2]
    return _PAULI_CHAR[code]


def _channel_index(prog: Program, fault: FaultLocation) -> int:
    hit = np.flatnonzero((prog.chan_instruction == fault.instruction) & (prog.chan_group == fault.group))
    if len(hit) != 1:
        raise SamplerError(f"{fault} does not point at a noise channel")
    c = int(hit[0])
    kind = int(prog.chan_kind[c])
    valid = {DEP1: ("X", "Y", "Z"), XERR: ("X",)}.get(kind)
    if valid is None:
        ok = len(fault.pauli) == 2 and set(fault.pauli) <= set("IXYZ") and fault.pauli != "II"
    else:
        ok = fault.pauli in valid
    if not ok:
        raise SamplerError(f"Pauli {fault.pauli!r} is not a component of the channel at {fault}")
    return c


def fault_components(circuit: Circuit) -> list[FaultLocation]:
    """Every elementary fault of every channel with nonzero probability."""
    prog = compile_circuit(circuit)
    out = []
    for c in range(len(prog.chan_kind)):
        if prog.chan_p[c] <= 0:
            continue
        kind = int(prog.chan_kind[c])
        codes = {DEP1: range(1, 4), DEP2: range(1, 16), XERR: (1,)}[kind]
        for code in codes:
            out.append(FaultLocation(int(prog.chan_instruction[c]), int(prog.chan_group[c]),
                                     pauli_name(kind, code)))
    return out


def propagate_columns(circuit: Circuit, columns: Sequence[Iterable[FaultLocation]]) -> tuple[np.ndarray, np.ndarray]:
    """Symptoms of several fault sets at once, one set per column.

    Returns (detectors, observables) bool matrices with one row per column.
    """
    prog = compile_circuit(circuit)
    ch, shot, code = [], [], []
    for k, faults in enumerate(columns):
        for f in faults:
            ch.append(_channel_index(prog, f))
            shot.append(k)
            code.append(pauli_code(f.pauli))
    ch_a = np.asarray(ch, dtype=np.int64)
    shot_a = np.asarray(shot, dtype=np.int64)
    code_a = np.asarray(code, dtype=np.int64)
    order = np.argsort(ch_a, kind="stable")
    n = max(len(columns), 1)
    dets, obs = simulate(prog, n, ch_a[order], shot_a[order], code_a[order])
    return unpack(dets, n)[:len(columns)], unpack(obs, n)[:len(columns)]


def propagate_fault(circuit: Circuit, fault: FaultLocation | Iterable[FaultLocation]) -> tuple[frozenset[int], bool]:
    """Detectors fired and observable flip caused by one fault (or a set of faults)."""
    faults = [fault] if isinstance(fault, FaultLocation) else list(fault)
    dets, obs = propagate_columns(circuit, [faults])
    return frozenset(np.flatnonzero(dets[0]).tolist()), bool(obs[0].any())


def write_shots(sample: DetectionSample, out: BinaryIO | TextIO, fmt: str = "01") -> None:
    """Dump detectors followed by observables, one shot per record.

    ``01``: one ASCII line of 0/1 characters per shot.  ``b8``: bits packed
    little-endian into bytes, each shot padded to a whole byte.
    """
    bits = np.concatenate([sample.detectors, sample.observables], axis=1)
    if fmt == "01":
        lut = np.array([ord("0"), ord("1")], dtype=np.uint8)
        rows = lut[bits.astype(np.uint8)]
        text = "".join(r.tobytes().decode("ascii") + "\n" for r in rows)
        out.write(text if hasattr(out, "encoding") else text.encode("ascii"))
    elif fmt == "b8":
        data = np.packbits(bits, axis=1, bitorder="little").tobytes()
        out.write(data)
    else:
        raise SamplerError(f"unknown shot format {fmt!r}; expected '01' or 'b8'")
