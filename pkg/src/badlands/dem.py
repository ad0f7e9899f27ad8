"""Detector error models and matching graphs for Z-memory circuits."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .circuit import Circuit
from .sampler import DEP2, FaultLocation, compile_circuit, fault_components, propagate_columns

BOUNDARY = -1
# Mechanisms at or above 1/2 would get a non-positive weight.
MAX_EDGE_P = 0.5 - 1e-9


class DemError(ValueError):
    pass


def combine(p1: float, p2: float) -> float:
    """Probability that exactly one of two independent mechanisms fires."""
    return p1 * (1 - p2) + p2 * (1 - p1)


def combine_all(ps: Iterable[float]) -> float:
    # Sorting first makes the float result independent of arrival order.
    out = 0.0
    for p in sorted(ps):
        out = combine(out, p)
    return out


@dataclass(frozen=True)
class ErrorMechanism:
    probability: float
    detectors: tuple[int, ...]
    observable: bool
    sources: tuple[FaultLocation, ...] = field(default=(), compare=False, repr=False)

    def to_text(self) -> str:
        parts = [f"error({self.probability!r})"]
        parts += [f"D{d}" for d in self.detectors]
        if self.observable:
            parts.append("L0")
        return " ".join(parts)


def _component_probability(kind: int, p: float) -> float:
    return p / 15 if kind == DEP2 else (p / 3 if kind == 0 else p)


def extract_dem(circuit: Circuit) -> list[ErrorMechanism]:
    """Graphlike error model over the Z-family detectors of ``circuit``.

    Every Pauli component of every noise channel is propagated once.  Symptoms
    touching more than two Z-family detectors are split into two graphlike
    parts, and mechanisms with equal symptoms are merged.
    """
    prog = compile_circuit(circuit)
    faults = fault_components(circuit)
    if not faults:
        return []
    dets, obs = propagate_columns(circuit, [[f] for f in faults])
    obs = obs.any(axis=1) if obs.shape[1] else np.zeros(len(faults), dtype=bool)

    silent = ~dets.any(axis=1) & obs
    if silent.any():
        f = faults[int(np.flatnonzero(silent)[0])]
        raise DemError(f"undetectable fault flips the observable: {f}")

    z_dets = np.asarray(circuit.z_detectors, dtype=np.int64)
    restricted = dets[:, z_dets]

    chan_of = {(int(i), int(g)): c for c, (i, g) in
               enumerate(zip(prog.chan_instruction, prog.chan_group))}
    symptoms: list[tuple[tuple[int, ...], bool]] = []
    for k in range(len(faults)):
        ids = tuple(int(z_dets[j]) for j in np.flatnonzero(restricted[k]))
        symptoms.append((ids, bool(obs[k])))
    index_of = {(f.instruction, f.group, f.pauli): k for k, f in enumerate(faults)}

    contributions: dict[tuple[tuple[int, ...], bool], list[float]] = {}
    sources: dict[tuple[tuple[int, ...], bool], list[FaultLocation]] = {}
    graphlike: set[tuple[tuple[int, ...], bool]] = set()
    pending = []
    for k, f in enumerate(faults):
        ids, flip = symptoms[k]
        c = chan_of[(f.instruction, f.group)]
        p = _component_probability(int(prog.chan_kind[c]), float(prog.chan_p[c]))
        if not ids:
            if flip:
                raise DemError(f"fault {f} flips the observable with no Z-family detector")
            continue
        if len(ids) <= 2:
            contributions.setdefault((ids, flip), []).append(p)
            sources.setdefault((ids, flip), []).append(f)
            graphlike.add((ids, flip))
        else:
            pending.append((k, f, p))

    for k, f, p in pending:
        parts = _split_by_qubit(f, symptoms, index_of)
        if parts is None:
            parts = _split_by_search(symptoms[k], graphlike)
        if parts is None:
            raise DemError(f"cannot decompose symptom {symptoms[k][0]} of {f} into graphlike parts")
        for part in parts:
            contributions.setdefault(part, []).append(p)

    out = [
        ErrorMechanism(combine_all(ps), ids, flip, tuple(sources.get((ids, flip), ())))
        for (ids, flip), ps in contributions.items()
    ]
    out.sort(key=lambda m: (m.detectors, m.observable))
    return out


def _split_by_qubit(f: FaultLocation, symptoms, index_of):
    """Split a two-qubit Pauli into its single-qubit halves if both are graphlike."""
    if len(f.pauli) != 2 or "I" in f.pauli:
        return None
    parts = []
    for half in (f.pauli[0] + "I", "I" + f.pauli[1]):
        k = index_of.get((f.instruction, f.group, half))
        if k is None:
            return None
        ids, flip = symptoms[k]
        if len(ids) > 2:
            return None
        if ids:
            parts.append((ids, flip))
        elif flip:
            return None
    return parts


def _split_by_search(symptom, graphlike):
    ids, flip = symptom
    if len(ids) > 4:
        return None
    ids_set = set(ids)
    for r in (1, 2):
        for first in itertools.combinations(ids, r):
            rest = tuple(sorted(ids_set - set(first)))
            if not 1 <= len(rest) <= 2:
                continue
            for f1 in (False, True):
                a, b = (first, f1), (rest, f1 ^ flip)
                if a in graphlike and b in graphlike:
                    return [a, b]
    return None


def dem_to_text(mechanisms: Sequence[ErrorMechanism]) -> str:
    return "".join(m.to_text() + "\n" for m in mechanisms)


def dem_from_text(text: str) -> list[ErrorMechanism]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if not line.startswith("error(") or ")" not in line:
            raise DemError(f"line {lineno}: expected 'error(p) D..', got {line!r}")
        head, rest = line[len("error("):].split(")", 1)
        dets, flip = [], False
        for tok in rest.split():
            if tok.startswith("D"):
                dets.append(int(tok[1:]))
            elif tok == "L0":
                flip = not flip
            else:
                raise DemError(f"line {lineno}: unexpected token {tok!r}")
        out.append(ErrorMechanism(float(head), tuple(sorted(dets)), flip))
    return out


def edge_weight(p: float) -> float:
    return math.log((1 - p) / p)


@dataclass
class Edge:
    u: int
    v: int
    probability: float
    weight: float
    observable: bool


@dataclass
class MatchingGraph:
    """Z-family detectors plus one virtual boundary node (id ``BOUNDARY``)."""

    nodes: list[int]
    edges: list[Edge]

    def adjacency(self) -> dict[int, list[Edge]]:
        adj: dict[int, list[Edge]] = {n: [] for n in self.nodes}
        adj[BOUNDARY] = []
        for e in self.edges:
            adj[e.u].append(e)
            adj[e.v].append(e)
        return adj


def build_matching_graph(mechanisms: Sequence[ErrorMechanism], nodes: Iterable[int] = ()) -> MatchingGraph:
    """Turn graphlike mechanisms into weighted edges.

    Parallel edges merge their probabilities; the merged edge keeps the
    observable mask of the likelier contributor.
    """
    node_set = set(nodes)
    merged: dict[tuple[int, int], list[tuple[float, bool]]] = {}
    for m in mechanisms:
        if not 1 <= len(m.detectors) <= 2:
            raise DemError(f"mechanism {m.to_text()!r} is not graphlike")
        if not 0 < m.probability < 1:
            raise DemError(f"mechanism {m.to_text()!r} has probability outside (0, 1)")
        u, v = (m.detectors[0], BOUNDARY) if len(m.detectors) == 1 else m.detectors
        node_set.update(d for d in (u, v) if d != BOUNDARY)
        merged.setdefault((u, v), []).append((m.probability, m.observable))

    edges = []
    clamped = 0
    for (u, v), items in sorted(merged.items()):
        p = combine_all(pi for pi, _ in items)
        flip = max(items, key=lambda it: (it[0], not it[1]))[1]
        if p > MAX_EDGE_P:
            clamped += 1
            p = MAX_EDGE_P
        edges.append(Edge(u, v, p, edge_weight(p), flip))
    if clamped:
        warnings.warn(f"{clamped} matching edge(s) had p >= 0.5; clamped to {MAX_EDGE_P}", stacklevel=2)
    return MatchingGraph(sorted(node_set), edges)


def matching_graph_for(circuit: Circuit) -> MatchingGraph:
    return build_matching_graph(extract_dem(circuit), circuit.z_detectors)
