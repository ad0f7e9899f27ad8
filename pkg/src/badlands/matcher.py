"""Minimum-weight perfect matching decoder.

Path weights come from Dijkstra over the matching graph with edge weights
discretized to integers, so matching costs compare exactly.  Every fired
detector may pair with another fired detector or with the boundary.

A syndrome first splits into independent clusters: two fired detectors can
only profit from being paired when their path is strictly shorter than
sending both to the boundary.  Clusters of up to ``dp_limit`` detectors are
solved exactly by a compiled subset recursion; larger ones go to the blossom
algorithm on the fired nodes plus one boundary partner per node.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .blossom import max_weight_matching_arrays
from .dem import BOUNDARY, MatchingGraph
from .sampler import DetectionSample

WEIGHT_SCALE = 10_000
UNREACHABLE = np.iinfo(np.int64).max // 4
DP_LIMIT = 8

OK, UNMATCHABLE = 0, 2


class MatchingError(ValueError):
    pass


def discretize(weight: float) -> int:
    return int(round(weight * WEIGHT_SCALE))


def dijkstra(adj: list[list[tuple[int, int, int]]], source: int) -> tuple[list[int], list[int]]:
    """Single-source shortest paths with observable parity along each chosen path.

    ``adj[u]`` lists ``(v, weight, flip)``.  Ties keep the first path found,
    which is deterministic for a fixed adjacency order.
    """
    n = len(adj)
    dist = [UNREACHABLE] * n
    parity = [0] * n
    dist[source] = 0
    heap = [(0, source)]
    done = [False] * n
    while heap:
        du, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w, flip in adj[u]:
            nd = du + w
            if nd < dist[v]:
                dist[v] = nd
                parity[v] = parity[u] ^ flip
                heapq.heappush(heap, (nd, v))
    return dist, parity


@numba.njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@numba.njit(cache=True)
def _cluster_labels(pos, dist, b):
    k = len(pos)
    parent = np.arange(k)
    for i in range(k):
        for j in range(i + 1, k):
            if dist[pos[i], pos[j]] < dist[pos[i], b] + dist[pos[j], b]:
                ri = _find(parent, i)
                rj = _find(parent, j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    labels = np.empty(k, dtype=np.int64)
    for i in range(k):
        labels[i] = _find(parent, i)
    return labels


@numba.njit(cache=True)
def _solve_cluster(members, dist, parity, b, partner):
    """Exact min-weight matching of one cluster; writes partners (-1 = boundary).

    Returns (weight, flip) or (-1, 0) if no perfect matching exists.
    """
    c = len(members)
    size = 1 << c
    cost = np.full(size, UNREACHABLE, dtype=np.int64)
    choice = np.full(size, -2, dtype=np.int64)
    cost[0] = 0
    for mask in range(1, size):
        i = 0
        while not (mask >> i) & 1:
            i += 1
        rest = mask ^ (1 << i)
        u = members[i]
        best = UNREACHABLE
        pick = -2
        if dist[u, b] < UNREACHABLE and cost[rest] < UNREACHABLE:
            best = dist[u, b] + cost[rest]
            pick = -1
        for j in range(i + 1, c):
            if (rest >> j) & 1:
                v = members[j]
                w = dist[u, v]
                sub = cost[rest ^ (1 << j)]
                if w < dist[u, b] + dist[v, b] and sub < UNREACHABLE and w + sub < best:
                    best = w + sub
                    pick = j
        cost[mask] = best
        choice[mask] = pick
    full = size - 1
    if cost[full] >= UNREACHABLE:
        return -1, 0
    flip = 0
    mask = full
    while mask:
        i = 0
        while not (mask >> i) & 1:
            i += 1
        j = choice[mask]
        u = members[i]
        if j == -1:
            partner[i] = -1
            flip ^= parity[u, b]
            mask ^= 1 << i
        else:
            partner[i] = j
            partner[j] = i
            flip ^= parity[u, members[j]]
            mask ^= (1 << i) | (1 << j)
    return cost[full], flip


@numba.njit(cache=True)
def _solve_blossom(members, dist, parity, b, partner):
    """Same contract as ``_solve_cluster`` via the blossom algorithm.

    Each fired node gets a private boundary partner; partners pair freely
    with each other, so perfect matchings of the doubled graph correspond
    to matchings of the cluster where any node may use the boundary.
    """
    c = len(members)
    eu = np.empty(c * (c + 1), dtype=np.int64)
    ev = np.empty(c * (c + 1), dtype=np.int64)
    ew = np.empty(c * (c + 1), dtype=np.int64)
    big = 1
    for i in range(c):
        for j in range(c):
            if dist[members[i], b] < UNREACHABLE:
                big = max(big, dist[members[i], b] + 1)
            if dist[members[i], members[j]] < UNREACHABLE:
                big = max(big, dist[members[i], members[j]] + 1)
    m = 0
    for i in range(c):
        u = members[i]
        if dist[u, b] < UNREACHABLE:
            eu[m] = i
            ev[m] = c + i
            ew[m] = big - dist[u, b]
            m += 1
        for j in range(i + 1, c):
            eu[m] = c + i
            ev[m] = c + j
            ew[m] = big
            m += 1
            v = members[j]
            if dist[u, v] < UNREACHABLE and dist[u, v] < dist[u, b] + dist[v, b]:
                eu[m] = i
                ev[m] = j
                ew[m] = big - dist[u, v]
                m += 1
    mate = max_weight_matching_arrays(2 * c, eu[:m], ev[:m], ew[:m], True)
    total = 0
    flip = 0
    for i in range(c):
        j = mate[i]
        if j < 0:
            return -1, 0
        u = members[i]
        if j >= c:
            partner[i] = -1
            total += dist[u, b]
            flip ^= parity[u, b]
        else:
            partner[i] = j
            if j > i:
                total += dist[u, members[j]]
                flip ^= parity[u, members[j]]
    return total, flip


@numba.njit(cache=True)
def _solve(members, dist, parity, b, partner, limit):
    if len(members) <= limit:
        return _solve_cluster(members, dist, parity, b, partner)
    return _solve_blossom(members, dist, parity, b, partner)


@numba.njit(cache=True)
def _decode_many(indptr, pos, dist, parity, b, limit, flips, weights, status):
    for s in range(len(indptr) - 1):
        fired = pos[indptr[s]:indptr[s + 1]]
        k = len(fired)
        flips[s] = 0
        weights[s] = 0
        status[s] = OK
        if k == 0:
            continue
        labels = _cluster_labels(fired, dist, b)
        counts = np.zeros(k, dtype=np.int64)
        for i in range(k):
            counts[labels[i]] += 1
        total = 0
        flip = 0
        for root in range(k):
            if counts[root] == 0:
                continue
            members = np.empty(counts[root], dtype=np.int64)
            n = 0
            for i in range(k):
                if labels[i] == root:
                    members[n] = fired[i]
                    n += 1
            partner = np.empty(n, dtype=np.int64)
            w, f = _solve(members, dist, parity, b, partner, limit)
            if w < 0:
                status[s] = UNMATCHABLE
                break
            total += w
            flip ^= f
        flips[s] = flip
        weights[s] = total


@dataclass
class Decoded:
    flip: bool
    weight: int
    pairs: list[tuple[int, int]]  # detector ids; BOUNDARY marks a boundary match


class Matcher:
    """Decoder bound to one matching graph; precomputes all-pairs path data."""

    def __init__(self, graph: MatchingGraph, dp_limit: int = DP_LIMIT):
        self.graph = graph
        self.dp_limit = dp_limit
        self.nodes = list(graph.nodes)
        self.pos = {n: i for i, n in enumerate(self.nodes)}
        b = len(self.nodes)
        self.pos[BOUNDARY] = b
        self.boundary = b
        adj: list[list[tuple[int, int, int]]] = [[] for _ in range(b + 1)]
        for e in graph.edges:
            if e.u not in self.pos or e.v not in self.pos:
                raise MatchingError(f"edge ({e.u}, {e.v}) references an unknown node")
            u, v, w = self.pos[e.u], self.pos[e.v], discretize(e.weight)
            if w < 0:
                raise MatchingError(f"edge ({e.u}, {e.v}) has negative weight {e.weight}")
            adj[u].append((v, w, int(e.observable)))
            adj[v].append((u, w, int(e.observable)))
        self.dist = np.empty((b + 1, b + 1), dtype=np.int64)
        self.parity = np.empty((b + 1, b + 1), dtype=np.int64)
        for s in range(b + 1):
            self.dist[s], self.parity[s] = dijkstra(adj, s)
        self._cache: dict[bytes, bool] = {}

    def positions(self, fired: Sequence[int]) -> np.ndarray:
        try:
            return np.asarray(sorted(self.pos[f] for f in set(fired)), dtype=np.int64)
        except KeyError as exc:
            raise MatchingError(f"detector {exc.args[0]} is not a node of the matching graph") from None

    def match(self, fired: Sequence[int]) -> Decoded:
        """Minimum-weight matching of ``fired`` with its pairs spelled out."""
        arr = self.positions(fired)
        if len(arr) == 0:
            return Decoded(False, 0, [])
        b = self.boundary
        labels = _cluster_labels(arr, self.dist, b)
        flip = 0
        weight = 0
        pairs: list[tuple[int, int]] = []
        for root in sorted(set(labels.tolist())):
            members = arr[labels == root]
            partner = np.empty(len(members), dtype=np.int64)
            w, f = _solve(members, self.dist, self.parity, b, partner, self.dp_limit)
            if w < 0:
                raise MatchingError(self._unmatched_message(members))
            matched = [(i, None if partner[i] < 0 else int(partner[i]))
                       for i in range(len(members)) if partner[i] < 0 or partner[i] > i]
            weight += int(w)
            flip ^= int(f)
            for i, j in matched:
                pairs.append((self.nodes[members[i]], BOUNDARY if j is None else self.nodes[members[j]]))
        return Decoded(bool(flip), weight, sorted(pairs))

    def _unmatched_message(self, members) -> str:
        ids = [self.nodes[m] for m in members]
        return f"detectors {ids} have no perfect matching (disconnected from partners and boundary)"

    def decode(self, fired: Sequence[int]) -> bool:
        return self.match(fired).flip

    def decode_many(self, syndromes: Sequence[Sequence[int]]) -> np.ndarray:
        """Predicted flips for a list of fired-detector lists."""
        pos_lists = [self.positions(s) for s in syndromes]
        indptr = np.zeros(len(pos_lists) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(p) for p in pos_lists])
        pos = np.concatenate(pos_lists) if pos_lists else np.zeros(0, dtype=np.int64)
        return self._decode_csr(indptr, pos.astype(np.int64))

    def _decode_csr(self, indptr, pos):
        n = len(indptr) - 1
        flips = np.zeros(n, dtype=np.int64)
        weights = np.zeros(n, dtype=np.int64)
        status = np.zeros(n, dtype=np.int64)
        _decode_many(indptr, pos, self.dist, self.parity, self.boundary, self.dp_limit, flips, weights, status)
        if (status == UNMATCHABLE).any():
            s = int(np.flatnonzero(status == UNMATCHABLE)[0])
            raise MatchingError(self._unmatched_message(pos[indptr[s]:indptr[s + 1]]))
        return flips.astype(bool)

    def decode_rows(self, rows: np.ndarray) -> np.ndarray:
        """Predictions for a (shots, num_nodes) bool matrix in node order; each distinct row is decoded once."""
        if len(rows) == 0:
            return np.zeros(0, dtype=bool)
        packed = np.ascontiguousarray(np.packbits(rows, axis=1))
        keys = packed.view(np.dtype((np.void, packed.shape[1]))).ravel()
        uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        preds = np.zeros(len(uniq), dtype=bool)
        todo = []
        for u in range(len(uniq)):
            hit = self._cache.get(uniq[u].tobytes())
            if hit is None:
                todo.append(u)
            else:
                preds[u] = hit
        if todo:
            sub = rows[first[todo]]
            r, c = np.nonzero(sub)
            indptr = np.zeros(len(todo) + 1, dtype=np.int64)
            indptr[1:] = np.cumsum(np.bincount(r, minlength=len(todo)))
            got = self._decode_csr(indptr, c.astype(np.int64))
            preds[todo] = got
            if len(self._cache) < 4_000_000:
                for u, g in zip(todo, got):
                    self._cache[uniq[u].tobytes()] = bool(g)
        return preds[inverse.ravel()]


def decode(graph: MatchingGraph | Matcher, fired: Sequence[int]) -> bool:
    matcher = graph if isinstance(graph, Matcher) else Matcher(graph)
    return matcher.decode(fired)


def decode_batch(graph: MatchingGraph | Matcher, samples: DetectionSample) -> tuple[int, int]:
    """Count shots whose predicted flip disagrees with the sampled observable.

    Detector columns are looked up by the graph's node ids, so ``samples``
    may carry extra (unmatched) detectors.
    """
    matcher = graph if isinstance(graph, Matcher) else Matcher(graph)
    if samples.observables.shape[0] != samples.detectors.shape[0]:
        raise MatchingError("detector and observable shot counts differ")
    if samples.observables.shape[1] < 1:
        raise MatchingError("samples carry no observable")
    if matcher.nodes and max(matcher.nodes) >= samples.detectors.shape[1]:
        raise MatchingError("samples have fewer detectors than the matching graph expects")
    preds = matcher.decode_rows(samples.detectors[:, matcher.nodes])
    return int(np.count_nonzero(preds != samples.observables[:, 0])), samples.shots
