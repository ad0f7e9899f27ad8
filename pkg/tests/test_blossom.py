import itertools

import numpy as np
import pytest

from badlands.blossom import max_weight_matching


def _brute(n, edges, maxcardinality):
    """Best (cardinality, weight) or weight over all matchings, by recursion on the lowest free vertex."""
    w = {}
    for u, v, x in edges:
        w[(u, v)] = w[(v, u)] = x

    def best(free):
        if not free:
            return (0, 0)
        u, rest = free[0], free[1:]
        out = best(rest)  # leave u unmatched
        for v in rest:
            if (u, v) in w:
                c, s = best(tuple(x for x in rest if x != v))
                out = max(out, (c + 1, s + w[(u, v)]) if maxcardinality else (0, s + w[(u, v)]),
                          key=lambda t: t if maxcardinality else t[1])
        return out

    return best(tuple(range(n)))


def _score(n, edges, mate):
    w = {}
    for u, v, x in edges:
        w[(u, v)] = w[(v, u)] = x
    total, card = 0, 0
    for u, v in enumerate(mate):
        if v == -1:
            continue
        assert mate[v] == u
        assert (u, v) in w
        if u < v:
            total += w[(u, v)]
            card += 1
    return card, total


def _random_graph(rng, n, density, wmax):
    edges = []
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < density:
            edges.append((u, v, int(rng.integers(1, wmax))))
    return edges


@pytest.mark.parametrize("maxcard", [False, True])
def test_against_brute_force(maxcard):
    rng = np.random.default_rng(5)
    for trial in range(300):
        n = int(rng.integers(1, 9))
        edges = _random_graph(rng, n, rng.uniform(0.2, 1.0), int(rng.choice([3, 20, 10**6])))
        mate = max_weight_matching(n, edges, maxcard)
        card, total = _score(n, edges, mate)
        bc, bw = _brute(n, edges, maxcard)
        if maxcard:
            assert (card, total) == (bc, bw), (n, edges)
        else:
            assert total == bw, (n, edges)


@pytest.mark.parametrize("maxcard", [False, True])
def test_against_networkx(maxcard):
    nx = pytest.importorskip("networkx")
    rng = np.random.default_rng(11)
    for trial in range(60):
        n = int(rng.integers(10, 40))
        edges = _random_graph(rng, n, rng.uniform(0.1, 0.6), int(rng.choice([5, 1000, 10**9])))
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_weighted_edges_from(edges)
        ref = nx.max_weight_matching(g, maxcardinality=maxcard)
        ref_w = sum(g[u][v]["weight"] for u, v in ref)
        card, total = _score(n, edges, max_weight_matching(n, edges, maxcard))
        assert total == ref_w
        if maxcard:
            assert card == len(ref)


def test_trivial_graphs():
    assert max_weight_matching(0, []) == []
    assert max_weight_matching(3, []) == [-1, -1, -1]
    assert max_weight_matching(2, [(0, 1, 5)]) == [1, 0]
    # a path a-b-c-d prefers the heavy middle edge unless cardinality is forced
    path = [(0, 1, 2), (1, 2, 5), (2, 3, 2)]
    assert max_weight_matching(4, path) == [-1, 2, 1, -1]
    assert max_weight_matching(4, path, maxcardinality=True) == [1, 0, 3, 2]


def test_odd_cycle_blossom():
    # a triangle with a pendant forces a blossom to be formed and expanded
    edges = [(0, 1, 6), (1, 2, 6), (0, 2, 6), (2, 3, 7), (0, 4, 1)]
    card, total = _score(5, edges, max_weight_matching(5, edges, True))
    assert (card, total) == _brute(5, edges, True)


def test_rejects_self_loop():
    with pytest.raises(ValueError):
        max_weight_matching(2, [(1, 1, 3)])
