import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from owp.gadget import build_quasirandom_regular
from owp.graph_core import (
    CycleFactor,
    CycleType,
    FactorSpec,
    Graph,
    HostGraph,
    MalformedFactorError,
    OrientedPartitionedGraph,
    balance_profile,
    cycle_type_of,
    is_divisible,
    is_quasirandom,
    is_typical,
    norm_edge,
    verify_decomposition,
)


def test_cycle_type_examples():
    assert cycle_type_of(CycleFactor(5, [(0, 1, 2, 3, 4)])) == CycleType((5,))
    assert cycle_type_of([(0, 1, 2), (3, 4, 5, 6)], 7) == CycleType((3, 4))
    with pytest.raises(MalformedFactorError):
        CycleFactor(5, [(0, 1, 2, 1, 4)])


def test_cycle_factor_rejects_partial_cover_and_short_cycles():
    with pytest.raises(MalformedFactorError):
        CycleFactor(6, [(0, 1, 2)])
    with pytest.raises(MalformedFactorError):
        CycleFactor(4, [(0, 1), (2, 3)])


def test_from_edges_recovers_cycles():
    f = CycleFactor(7, [(0, 3, 5), (1, 6, 2, 4)])
    g = CycleFactor.from_edges(7, f.edges)
    assert g.edges == f.edges and g.cycle_type() == f.cycle_type()


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(3, 9), min_size=1, max_size=5), st.randoms(use_true_random=False))
def test_cycle_type_invariant_under_relabeling(lengths, rnd):
    n = sum(lengths)
    vs = list(range(n))
    rnd.shuffle(vs)
    cycles, pos = [], 0
    for L in lengths:
        cycles.append(vs[pos : pos + L])
        pos += L
    f = CycleFactor(n, cycles)
    perm = list(range(n))
    rnd.shuffle(perm)
    assert f.relabel(perm).cycle_type() == f.cycle_type() == CycleType(tuple(lengths))


def test_verify_examples():
    k5 = HostGraph.complete(5)
    spec = FactorSpec.single((5,), 2)
    good = [CycleFactor(5, [(0, 1, 2, 3, 4)]), CycleFactor(5, [(0, 2, 4, 1, 3)])]
    assert verify_decomposition(k5, good, spec)
    twice = [good[0], good[0]]
    rep = verify_decomposition(k5, twice, spec)
    assert not rep and "shared" in rep.reason
    e = rep.witness[-1]
    assert e in good[0].edges


def test_verify_reports_uncovered_and_wrong_types():
    k7 = HostGraph.complete(7)
    f = CycleFactor(7, [(0, 1, 2, 3, 4, 5, 6)])
    rep = verify_decomposition(k7, [f], FactorSpec.single((7,), 3))
    assert not rep and "not covered" in rep.reason
    k5 = HostGraph.complete(5)
    fs = [CycleFactor(5, [(0, 1, 2, 3, 4)]), CycleFactor(5, [(0, 2, 4, 1, 3)])]
    rep = verify_decomposition(k5, fs, FactorSpec.single((5,), 3))
    assert not rep and "cycle types" in rep.reason


def test_verify_non_host_edge():
    host = HostGraph.custom(6, oracles.complete_minus_pm_edges(6))
    f = CycleFactor(6, [(0, 1, 2), (3, 4, 5)])
    rep = verify_decomposition(host, [f], FactorSpec.single((3, 3), 2))
    assert not rep and "non-host" in rep.reason


@pytest.mark.parametrize("n", [5, 7, 9, 11])
def test_verify_agrees_with_oracle_on_walecki(n):
    host = HostGraph.complete(n)
    factors = [CycleFactor(n, f) for f in oracles.walecki(n)]
    spec = FactorSpec.single((n,), (n - 1) // 2)
    assert verify_decomposition(host, factors, spec)
    assert not oracles.decomposition_problems(n, oracles.complete_edges(n), oracles.walecki(n), {(n,): (n - 1) // 2})


def test_edge_count_invariant_on_accepted():
    n = 9
    factors = [CycleFactor(n, f) for f in oracles.walecki(n)]
    assert sum(len(f.edges) for f in factors) == len(HostGraph.complete(n).edges)


def test_host_graphs():
    h = HostGraph.complete_minus_pm(6)
    assert len(h.edges) == 12 and set(h.degrees()) == {4}
    with pytest.raises(ValueError):
        HostGraph.complete_minus_pm(5)


def test_balance_profile_examples():
    class_of = {0: "A", 1: "B", 2: "C"}
    arcs = frozenset({("A", "B"), ("B", "C"), ("C", "A")})
    empty = OrientedPartitionedGraph(Graph(3, frozenset()), class_of, arcs)
    assert balance_profile(empty).r == 0
    tri = OrientedPartitionedGraph(Graph(3, frozenset({(0, 1), (1, 2), (0, 2)})), class_of, arcs)
    assert balance_profile(tri).r == 1
    # a second A-B arc at vertex 0
    class_of4 = {0: "A", 1: "B", 2: "C", 3: "B"}
    extra = OrientedPartitionedGraph(Graph(4, frozenset({(0, 1), (1, 2), (0, 2), (0, 3)})), class_of4, arcs)
    prof = balance_profile(extra)
    assert prof.r is None and prof.witness is not None


def test_balance_profile_rejects_off_digraph_edges():
    class_of = {0: "A", 1: "A"}
    g = OrientedPartitionedGraph(Graph(2, frozenset({(0, 1)})), class_of, frozenset({("A", "B")}))
    with pytest.raises(ValueError):
        balance_profile(g)


def test_balance_profile_relabel_invariance():
    rng = random.Random(3)
    labels = ["A", "B", "C"]
    class_of = {v: labels[v % 3] for v in range(12)}
    arcs = frozenset({("A", "B"), ("B", "C"), ("C", "A")})
    by = {lab: [v for v in class_of if class_of[v] == lab] for lab in labels}
    # two random class-respecting triangle factors
    edges = set()
    for _ in range(2):
        cols = [by[lab][:] for lab in labels]
        for c in cols:
            rng.shuffle(c)
        for a, b, c in zip(*cols):
            edges |= {norm_edge(a, b), norm_edge(b, c), norm_edge(a, c)}
    g = Graph(12, frozenset(edges))
    r = balance_profile(OrientedPartitionedGraph(g, class_of, arcs)).r
    # permute inside each class
    perm = list(range(12))
    for lab in labels:
        vs = by[lab][:]
        rng.shuffle(vs)
        for a, b in zip(by[lab], vs):
            perm[a] = b
    r2 = balance_profile(OrientedPartitionedGraph(g.relabel(perm), class_of, arcs)).r
    assert r == r2 == oracles.balance_r(edges, class_of, arcs, range(12))


def test_is_typical_complete_graph():
    n = 30
    g = HostGraph.complete(n)
    classes = [list(range(15)), list(range(15, 30))]
    # a vertex is not its own neighbour, so K_n sits at relative deviation about s/|V_i|
    assert is_typical(g, classes, 0.15, 2, 1.0)
    assert not is_typical(g, classes, 0.01, 2, 1.0)


def test_is_typical_zero_density_violation():
    g = Graph(4, frozenset({(0, 2)}))
    rep = is_typical(g, [[0, 1], [2, 3]], 0.5, 1, np.array([[0.0, 0.0], [0.0, 0.0]]))
    assert not rep and rep.deviation == float("inf")


def test_is_typical_random_bipartite():
    # at |V_i| = 100, pair codegrees only stay within 20% of expectation for dense slices
    d, hits = 0.9, 0
    a, b = list(range(100)), list(range(100, 200))
    D = np.array([[0.0, d], [d, 0.0]])
    for seed in range(10):
        M = np.random.default_rng(seed).random((100, 100)) < d
        g = Graph(200, frozenset((int(u), 100 + int(v)) for u, v in zip(*np.nonzero(M))))
        assert is_typical(g, [a, b], 0.2, 1, D)
        hits += is_typical(g, [a, b], 0.2, 2, D).ok
    assert hits >= 7


def test_is_quasirandom_examples():
    n = 20
    assert is_quasirandom(HostGraph.complete(n), 2 / n, 1.0)
    assert not is_quasirandom(Graph(n, frozenset()), 0.1, 0.5)
    g = build_quasirandom_regular(list(range(200)), 0.3, seed=1)
    assert is_quasirandom(g, 0.1, 0.3)


def test_is_divisible_examples():
    h = Graph(3, frozenset({(0, 1), (1, 2), (0, 2)}))
    classes = [[0, 1], [2, 3], [4, 5]]
    assert is_divisible(Graph(6, frozenset()), classes, h, [0, 1, 2]).m == 0
    copy = Graph(6, frozenset({(0, 2), (2, 4), (0, 4)}))
    rep = is_divisible(copy, classes, h, [0, 1, 2])
    assert rep and rep.m == 1
    bad = Graph(6, frozenset({(0, 2), (2, 4), (0, 4), (1, 3)}))
    assert not is_divisible(bad, classes, h, [0, 1, 2])


def test_is_divisible_necessary_on_random_decompositions():
    rng = random.Random(5)
    h = Graph(3, frozenset({(0, 1), (1, 2), (0, 2)}))
    classes = [list(range(4)), list(range(4, 8)), list(range(8, 12))]
    for _ in range(20):
        edges = set()
        for _ in range(rng.randint(1, 4)):
            a, b, c = (rng.choice(cl) for cl in classes)
            tri = {norm_edge(a, b), norm_edge(b, c), norm_edge(a, c)}
            if tri.isdisjoint(edges):
                edges |= tri
        assert is_divisible(Graph(12, frozenset(edges)), classes, h, [0, 1, 2])


def test_factor_spec_parse():
    spec = FactorSpec.parse("3,4x2;7x1")
    assert spec.total == 3 and spec.order == 7
    assert str(FactorSpec.parse(str(spec))) == str(spec)
    with pytest.raises(ValueError):
        FactorSpec.parse("3,4x2;3,3x1")


def test_edge_masks_match_edge_sets():
    n = 9
    f = CycleFactor(n, oracles.walecki(n)[1])
    mask = f.mask()
    assert int(mask.sum()) == n
    assert all(mask[idx] for idx in (n * u - u * (u + 1) // 2 + v - u - 1 for u, v in f.edges))
    assert set(itertools.chain.from_iterable(f.edges)) == set(range(n))
