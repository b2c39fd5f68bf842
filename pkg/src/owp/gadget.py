"""F-partitions, F-homomorphisms, the rewiring bijection and the absorber.

Class labels are strings: ``X34_1`` is the class of first vertices of a
3-part followed by a 4-part, ``X4_3`` is the class of third vertices of
4-parts, and ``X4_1`` names the merged first class of 4-parts on the
rewired side.
"""

from __future__ import annotations

import time

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from .graph_core import (
    CycleFactor,
    FactorSpec,
    Graph,
    OrientedPartitionedGraph,
    balance_profile,
    norm_edge,
    verify_decomposition,
)
from .partitions import PAIRS, PARTS, CountTable, CyclicPartition, Family, checked_partition, factor_counts, family_lookup
from .solver.search import SearchConfig, SearchOutcome, Verdict, resolvable_partite_cycle_decomposition


def pair_label(a: int, b: int) -> str:
    return f"X{a}{b}_1"


def class_label(a: int, i: int) -> str:
    """``X{a}_{i}``; for ``i == 1`` this is the merged class of the rewired side."""
    return f"X{a}_{i}"


CLASS_ORDER: tuple[str, ...] = tuple(
    lab
    for a in PARTS
    for lab in [pair_label(a, b) for b in PARTS] + [class_label(a, i) for i in range(2, a + 1)]
)
HAT_ORDER: tuple[str, ...] = tuple(class_label(a, i) for a in PARTS for i in range(1, a + 1))


def _reduced_arcs() -> frozenset[tuple[str, str]]:
    arcs = set()
    for a in PARTS:
        for i in range(2, a):
            arcs.add((class_label(a, i), class_label(a, i + 1)))
    for a, b in PAIRS:
        arcs.add((class_label(a, a), pair_label(a, b)))
        arcs.add((pair_label(a, b), class_label(b, 2)))
    return frozenset(arcs)


def _hat_arcs() -> frozenset[tuple[str, str]]:
    arcs = set()
    for a in PARTS:
        for i in range(1, a + 1):
            arcs.add((class_label(a, i), class_label(a, i % a + 1)))
    return frozenset(arcs)


R_ARCS = _reduced_arcs()
RHAT_ARCS = _hat_arcs()
HAT_OF = {pair_label(a, b): class_label(a, 1) for a, b in PAIRS} | {
    class_label(a, i): class_label(a, i) for a in PARTS for i in range(2, a + 1)
}


# ---------------------------------------------------------------------------
# F-partitions and homomorphisms


@dataclass(frozen=True)
class FPartition:
    """The 18 classes over a ground set, sized by the counts of ``F``."""

    n: int
    classes: dict[str, tuple[int, ...]]
    counts: CountTable
    family: Callable[[int], CyclicPartition] = field(repr=False, compare=False, default=None)

    @cached_property
    def class_of(self) -> dict[int, str]:
        return {v: lab for lab, vs in self.classes.items() for v in vs}

    @cached_property
    def hat_classes(self) -> dict[str, tuple[int, ...]]:
        out = {lab: () for lab in HAT_ORDER}
        for lab, vs in self.classes.items():
            out[HAT_OF[lab]] = out[HAT_OF[lab]] + vs
        return {lab: tuple(sorted(vs)) for lab, vs in out.items()}

    @cached_property
    def hat_class_of(self) -> dict[int, str]:
        return {v: HAT_OF[lab] for v, lab in self.class_of.items()}

    @cached_property
    def Y(self) -> frozenset[int]:
        return frozenset(v for a, b in PAIRS for v in self.classes[pair_label(a, b)])

    @cached_property
    def second_classes(self) -> frozenset[int]:
        """Union of the classes ``X{a}_2``."""
        return frozenset(v for a in PARTS for v in self.classes[class_label(a, 2)])

    def blown_classes(self, a: int) -> list[tuple[int, ...]]:
        """``(X^a_1, ..., X^a_a)`` on the rewired side."""
        return [self.hat_classes[class_label(a, i)] for i in range(1, a + 1)]

    def oriented(self, g: Graph) -> OrientedPartitionedGraph:
        return OrientedPartitionedGraph(g, self.class_of, R_ARCS)

    def oriented_hat(self, g: Graph) -> OrientedPartitionedGraph:
        return OrientedPartitionedGraph(g, self.hat_class_of, RHAT_ARCS)

    def in_reduced(self, u: int, v: int) -> bool:
        cu, cv = self.class_of[u], self.class_of[v]
        return (cu, cv) in R_ARCS or (cv, cu) in R_ARCS

    def in_hat(self, u: int, v: int) -> bool:
        cu, cv = self.hat_class_of[u], self.hat_class_of[v]
        return (cu, cv) in RHAT_ARCS or (cv, cu) in RHAT_ARCS


def class_sizes(counts: CountTable) -> dict[str, int]:
    sizes = {pair_label(a, b): counts.pairs[a, b] for a, b in PAIRS}
    sizes |= {class_label(a, i): counts.singles[a] for a in PARTS for i in range(2, a + 1)}
    return sizes


def build_f_partition(f: CycleFactor, vertices: Sequence[int] | None = None, family: Family | None = None) -> FPartition:
    """Fill the classes in :data:`CLASS_ORDER` with consecutive runs of the sorted ground set."""
    ground = sorted(range(f.n) if vertices is None else vertices)
    if len(ground) != f.n:
        raise ValueError(f"ground set has {len(ground)} vertices, F has {f.n}")
    lookup = family_lookup(family)
    counts = factor_counts(f, lookup)
    sizes = class_sizes(counts)
    classes, pos = {}, 0
    for lab in CLASS_ORDER:
        classes[lab] = tuple(ground[pos : pos + sizes[lab]])
        pos += sizes[lab]
    assert pos == f.n
    return FPartition(f.n, classes, counts, lookup)


def cycle_walk(cycle: Sequence[int], parts: Sequence[int]) -> list[tuple[int, str]]:
    """Class of each vertex of ``cycle`` when walking ``R`` as the parts dictate."""
    out, pos, t = [], 0, len(parts)
    for i, a in enumerate(parts):
        prev = parts[i - 1] if i else parts[t - 1]
        out.append((cycle[pos], pair_label(prev, a)))
        for j in range(2, a + 1):
            out.append((cycle[pos + j - 1], class_label(a, j)))
        pos += a
    return out


@dataclass(frozen=True)
class FHomomorphism:
    sigma: dict[int, str]
    # arcs of F in the direction given by R, one per edge
    arcs: tuple[tuple[int, int], ...]


def build_f_homomorphism(f: CycleFactor, p: FPartition) -> FHomomorphism:
    sigma: dict[int, str] = {}
    arcs = []
    for cyc in f.cycles:
        parts = checked_partition(p.family, len(cyc)).parts
        walk = cycle_walk(cyc, parts)
        sigma.update(walk)
        L = len(cyc)
        arcs.extend((cyc[i], cyc[(i + 1) % L]) for i in range(L))
    return FHomomorphism(sigma, tuple(arcs))


def homomorphism_report(f: CycleFactor, p: FPartition, h: FHomomorphism) -> list[str]:
    """Violations of the homomorphism facts: class sizes, arcs of ``R`` and 1-regularity."""
    problems = []
    sizes = {lab: 0 for lab in CLASS_ORDER}
    for lab in h.sigma.values():
        sizes[lab] += 1
    for lab in CLASS_ORDER:
        if sizes[lab] != len(p.classes[lab]):
            problems.append(f"|sigma^-1({lab})| = {sizes[lab]} but |{lab}| = {len(p.classes[lab])}")
    outd = {v: 0 for v in range(f.n)}
    ind = {v: 0 for v in range(f.n)}
    for x, y in h.arcs:
        if (h.sigma[x], h.sigma[y]) not in R_ARCS:
            problems.append(f"arc {x}->{y} maps to {h.sigma[x]}->{h.sigma[y]}, not an arc of R")
        outd[x] += 1
        ind[y] += 1
    if any(outd[v] != 1 or ind[v] != 1 for v in range(f.n)):
        problems.append("orientation of F is not 1-regular")
    return problems


# ---------------------------------------------------------------------------
# rewiring


@dataclass(frozen=True)
class Rewiring:
    """Permutation ``pi`` of ``Y`` with one cycle per cycle of ``F`` and the induced edge map."""

    partition: FPartition
    pi: dict[int, int]
    blocks: tuple[tuple[int, ...], ...]  # Y_C in pi order, one per cycle of F

    @cached_property
    def pi_inv(self) -> dict[int, int]:
        return {w: v for v, w in self.pi.items()}

    def _move(self, u: int, v: int, perm: Mapping[int, int]) -> tuple[int, int]:
        p = self.partition
        Y, second = p.Y, p.second_classes
        if u in Y and v in second:
            return norm_edge(perm[u], v)
        if v in Y and u in second:
            return norm_edge(u, perm[v])
        return norm_edge(u, v)

    def edge(self, u: int, v: int) -> tuple[int, int]:
        if not self.partition.in_reduced(u, v):
            raise ValueError(f"edge {(u, v)} is not in the universe of R")
        return self._move(u, v, self.pi)

    def edge_inv(self, u: int, v: int) -> tuple[int, int]:
        if not self.partition.in_hat(u, v):
            raise ValueError(f"edge {(u, v)} is not in the universe of the rewired reduced graph")
        return self._move(u, v, self.pi_inv)

    def cycles(self) -> list[tuple[int, ...]]:
        return [b for b in self.blocks]


def build_rewiring(f: CycleFactor, p: FPartition, seed: int = 0) -> Rewiring:
    """Pick ``Y_C`` for every cycle and let ``pi`` advance along the parts of that cycle.

    Vertices of each ``X^{a,b}_1`` are handed out in a seeded random order
    (sorted order for seed 0).
    """
    rng = np.random.default_rng(seed)
    pools = {}
    for a, b in PAIRS:
        vs = list(p.classes[pair_label(a, b)])
        if seed:
            rng.shuffle(vs)
        pools[a, b] = vs
    pi: dict[int, int] = {}
    blocks = []
    for cyc in f.cycles:
        parts = checked_partition(p.family, len(cyc)).parts
        t = len(parts)
        block = []
        for i in range(t):
            key = (parts[i], parts[(i + 1) % t])
            if not pools[key]:
                raise AssertionError(f"class {pair_label(*key)} exhausted while building Y_C")
            block.append(pools[key].pop(0))
        for i in range(t):
            pi[block[i]] = block[(i + 1) % t]
        blocks.append(tuple(block))
    if any(pools.values()):
        raise AssertionError("Y_C blocks do not use all of Y")
    return Rewiring(p, pi, tuple(blocks))


def _transport(g: Graph, rw: Rewiring, perm: Mapping[int, int], class_of: Mapping[int, str], arcs, side: str) -> Graph:
    # the loop body of Rewiring.edge, inlined: this runs on every edge of every subgraph
    p = rw.partition
    Y, second = p.Y, p.second_classes
    out = set()
    for u, v in g.edges:
        cu, cv = class_of[u], class_of[v]
        if (cu, cv) not in arcs and (cv, cu) not in arcs:
            raise ValueError(f"edge {(u, v)} is not in the universe of {side}")
        if u in Y and v in second:
            u = perm[u]
        elif v in Y and u in second:
            v = perm[v]
        out.add((u, v) if u < v else (v, u))
    return Graph.trusted(g.n, frozenset(out))


def rewire(g: Graph, rw: Rewiring) -> Graph:
    """``pi*`` applied edge by edge; every edge must join classes adjacent in ``R``."""
    return _transport(g, rw, rw.pi, rw.partition.class_of, R_ARCS, "R")


def unrewire(g: Graph, rw: Rewiring) -> Graph:
    return _transport(g, rw, rw.pi_inv, rw.partition.hat_class_of, RHAT_ARCS, "the rewired reduced graph")


def _factor_edges(h) -> set[tuple[int, int]]:
    if isinstance(h, Graph):
        return set(h.edges)
    edges = set()
    for cyc in h:
        L = len(cyc)
        edges.update(norm_edge(cyc[i], cyc[(i + 1) % L]) for i in range(L))
    return edges


def check_partite_factor(edges: set[tuple[int, int]], classes: Sequence[Sequence[int]]) -> None:
    """Raise unless ``edges`` form a perfect partite ``C_a``-factor on ``classes``."""
    a = len(classes)
    if a == 0 or not classes[0]:
        if edges:
            raise ValueError("edges on empty classes")
        return
    g = nx.Graph()
    verts = [v for cls in classes for v in cls]
    g.add_nodes_from(verts)
    g.add_edges_from(edges)
    if g.number_of_nodes() != len(verts):
        raise ValueError("factor touches vertices outside its classes")
    idx = {v: i for i, cls in enumerate(classes) for v in cls}
    for v in verts:
        nbrs = [idx[w] for w in g[v]]
        if sorted((w - idx[v]) % a for w in nbrs) != sorted([1, a - 1]):
            raise ValueError(f"vertex {v} is not on a partite {a}-cycle")
    for comp in nx.connected_components(g):
        if len(comp) != a:
            raise ValueError(f"component of size {len(comp)} in a partite {a}-factor")


def merge_partite_factors(h3, h4, h5, rw: Rewiring) -> CycleFactor:
    """``pi*^-1`` of three partite factors, which is a copy of ``F``.

    Each ``h`` is a :class:`Graph` or a list of cycles on the rewired side.
    """
    p = rw.partition
    edges: set[tuple[int, int]] = set()
    for a, h in zip(PARTS, (h3, h4, h5)):
        he = _factor_edges(h)
        check_partite_factor(he, p.blown_classes(a))
        edges |= he
    back = {rw.edge_inv(u, v) for u, v in edges}
    return CycleFactor.from_edges(p.n, back)


def merged_vertex_sets(h3, h4, h5, rw: Rewiring) -> list[frozenset[int]]:
    """For each block ``Y_C``, the union of the vertex sets of the partite cycles through it."""
    comp_of: dict[int, frozenset[int]] = {}
    for h in (h3, h4, h5):
        g = nx.Graph()
        g.add_edges_from(_factor_edges(h))
        for comp in nx.connected_components(g):
            fs = frozenset(comp)
            for v in comp:
                comp_of[v] = fs
    return [frozenset().union(*(comp_of[y] for y in block)) for block in rw.blocks]


# ---------------------------------------------------------------------------
# random regular builders


def one_factorization(m: int) -> list[list[tuple[int, int]]]:
    """Perfect matchings of ``K_m`` (``m`` even) by the circle method."""
    if m % 2:
        raise ValueError("one-factorization needs an even order")
    if m == 0:
        return []
    k = m - 1
    out = []
    for r in range(k):
        M = [(r, k)]
        for i in range(1, m // 2):
            M.append(((r + i) % k, (r - i) % k))
        out.append(M)
    return out


def bipartite_one_factorization(c: int) -> list[list[tuple[int, int]]]:
    """Matchings ``{(j, (j+k) mod c)}`` of ``K_{c,c}`` by index."""
    return [[(j, (j + k) % c) for j in range(c)] for k in range(c)]


MATCHING = "matching-activation"
PLANTED = "planted-resolvable"
MODES = (MATCHING, PLANTED)


@dataclass(frozen=True)
class BlownCycle:
    graph: Graph
    classes: tuple[tuple[int, ...], ...]
    r: int
    # planted mode: r factors, each a list of cycles; matching mode: chosen matching indices per pair
    witness: tuple


def build_blown_cycle(
    classes: Sequence[Sequence[int]], r: int, seed: int = 0, mode: str = MATCHING, n: int | None = None, attempts: int = 200
) -> BlownCycle:
    """A graph on ``V_1..V_t`` whose consecutive pairs are ``r``-regular.

    ``matching-activation`` draws ``r`` distinct matchings of a fixed
    1-factorization of each pair. ``planted-resolvable`` identifies every class
    with ``Z_c`` through a random bijection and unites ``r`` partite factors
    given by shift sequences whose closing shifts are distinct; shift choices
    are redrawn up to ``attempts`` times.
    """
    classes = tuple(tuple(c) for c in classes)
    t = len(classes)
    if t < 3:
        raise ValueError("a blown cycle needs at least three classes")
    sizes = {len(c) for c in classes}
    if len(sizes) != 1:
        raise ValueError("classes must have equal sizes")
    c = sizes.pop()
    if r > c or r < 0:
        raise ValueError(f"r = {r} outside 0..{c}")
    order = n if n is not None else (max((v for cls in classes for v in cls), default=-1) + 1)
    rng = np.random.default_rng(seed)
    if r == 0:
        return BlownCycle(Graph(order, frozenset()), classes, 0, ())
    if mode == MATCHING:
        facs = bipartite_one_factorization(c)
        edges, chosen = set(), []
        for i in range(t):
            xs, ys = classes[i], classes[(i + 1) % t]
            ks = sorted(int(k) for k in rng.choice(c, size=r, replace=False))
            chosen.append(tuple(ks))
            for k in ks:
                edges.update(norm_edge(xs[a], ys[b]) for a, b in facs[k])
        return BlownCycle(Graph(order, frozenset(edges)), classes, r, tuple(chosen))
    if mode != PLANTED:
        raise ValueError(f"unknown mode {mode!r}")
    labels = [list(rng.permutation(c)) for _ in range(t)]  # Z_c -> position in class
    for _ in range(attempts):
        shifts = np.array([rng.choice(c, size=r, replace=False) for _ in range(t - 1)])
        closing = (-shifts.sum(axis=0)) % c
        if len(set(closing.tolist())) == r:
            break
    else:
        raise ValueError(f"no planted family of {r} partite factors found for class size {c}")
    factors, edges = [], set()
    for k in range(r):
        cycles = []
        for z in range(c):
            cyc, cur = [], z
            for i in range(t):
                cyc.append(classes[i][labels[i][cur]])
                if i < t - 1:
                    cur = (cur + int(shifts[i, k])) % c
            cycles.append(tuple(cyc))
            edges.update(norm_edge(cyc[i], cyc[(i + 1) % t]) for i in range(t))
        factors.append(tuple(cycles))
    g = Graph(order, frozenset(edges))
    assert len(edges) == r * c * t
    return BlownCycle(g, classes, r, tuple(factors))


def build_quasirandom_regular(x: Sequence[int], d: float, seed: int = 0, n: int | None = None) -> Graph:
    """A ``2 floor(d|x|/2)``-regular graph on ``x`` from random perfect matchings.

    Odd orders take a regular graph on all but one vertex, remove a perfect
    matching inside a random ``r``-set ``N`` and join the last vertex to ``N``.
    """
    if not 0 < d < 1:
        raise ValueError("density must lie strictly between 0 and 1")
    x = list(x)
    m = len(x)
    r = 2 * int(d * m // 2)
    order = n if n is not None else (max(x, default=-1) + 1)
    if r > m - 1:
        raise ValueError(f"no {r}-regular graph on {m} vertices")
    rng = np.random.default_rng(seed)
    if r == 0:
        return Graph(order, frozenset())
    if r == m - 1:
        return Graph(order, frozenset(norm_edge(x[i], x[j]) for i in range(m) for j in range(i + 1, m)))
    if m % 2 == 0:
        facs = one_factorization(m)
        ks = rng.choice(len(facs), size=r, replace=False)
        return Graph(order, frozenset(norm_edge(x[a], x[b]) for k in ks for a, b in facs[k]))
    base = x[:-1]
    last = x[-1]
    for _ in range(100):
        g = build_quasirandom_regular(base, r / len(base) + 1e-9, int(rng.integers(2**31)), order)
        assert all(g.degree(v) == r for v in base)
        N = [base[i] for i in rng.choice(len(base), size=r, replace=False)]
        sub = nx.Graph()
        sub.add_nodes_from(N)
        sub.add_edges_from((u, v) for u, v in g.edges if u in set(N) and v in set(N))
        M = nx.max_weight_matching(sub, maxcardinality=True)
        if 2 * len(M) == r:
            edges = set(g.edges) - {norm_edge(u, v) for u, v in M}
            edges |= {norm_edge(last, v) for v in N}
            return Graph(order, frozenset(edges))
    raise ValueError("could not patch an odd-order regular graph")


# ---------------------------------------------------------------------------
# absorber


@dataclass(frozen=True)
class AbsorberConfig:
    r: int
    mode: str = PLANTED
    seed: int = 0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("r must be nonnegative")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class Absorber:
    graph: Graph
    rewiring: Rewiring
    config: AbsorberConfig
    # per part size a: the blown cycle G_a on the rewired side
    blown: dict[int, BlownCycle]

    @property
    def partition(self) -> FPartition:
        return self.rewiring.partition

    def planted_triple(self, k: int) -> tuple:
        """The ``k``-th planted partite factors ``(F^3_k, F^4_k, F^5_k)``."""
        if self.config.mode != PLANTED:
            raise ValueError("only planted absorbers carry partite factors")
        return tuple(self.blown[a].witness[k] if a in self.blown else () for a in PARTS)


def build_absorber(f: CycleFactor, p: FPartition, cfg: AbsorberConfig, rw: Rewiring | None = None) -> Absorber:
    """``G = pi*^-1(G_3 + G_4 + G_5)`` with each ``G_a`` an ``r``-regular blown ``a``-cycle."""
    rw = rw or build_rewiring(f, p, cfg.seed)
    blown: dict[int, BlownCycle] = {}
    edges: set[tuple[int, int]] = set()
    for a in PARTS:
        cls = p.blown_classes(a)
        c = len(cls[0])
        if c == 0:
            continue
        if cfg.r > c:
            raise ValueError(f"r = {cfg.r} exceeds the class size {c} of the blown {a}-cycle")
        bc = build_blown_cycle(cls, cfg.r, seed=cfg.seed * 7919 + a, mode=cfg.mode, n=p.n)
        blown[a] = bc
        edges |= set(bc.graph.edges)
    g = unrewire(Graph(p.n, frozenset(edges)), rw)
    return Absorber(g, rw, cfg, blown)


def balance_of(g: Graph, p: FPartition) -> int | None:
    return balance_profile(p.oriented(g), range(p.n)).r


def absorb_balanced_leftover(
    absorber: Absorber,
    leftover: Graph,
    f: CycleFactor,
    cfg: SearchConfig | None = None,
    solver: Callable[..., SearchOutcome] = resolvable_partite_cycle_decomposition,
) -> SearchOutcome:
    """Decompose ``G - L`` into copies of ``F`` through the rewired blown cycles.

    ``L`` must be a balanced subgraph of the absorber. The rewired remainder
    splits into one blown ``a``-cycle per part size; each is searched for a
    resolvable partite decomposition and the ``t``-th factors are merged back.
    """
    cfg = cfg or SearchConfig()
    p, rw, G = absorber.partition, absorber.rewiring, absorber.graph
    if not set(leftover.edges) <= set(G.edges):
        extra = min(set(leftover.edges) - set(G.edges))
        raise ValueError(f"leftover edge {extra} is not in the absorber")
    prof = balance_profile(p.oriented(leftover), range(p.n))
    if prof.r is None:
        raise ValueError(f"leftover is not balanced (vertex {prof.witness})")
    r = balance_of(G, p)
    r_rest = r - prof.r
    rest = G.minus(leftover)
    started = time.monotonic()
    if r_rest == 0:
        return SearchOutcome(Verdict.FOUND, [], 0, 0.0)
    rewired = rewire(rest, rw)
    parts_out: dict[int, list] = {}
    nodes = 0
    for a in PARTS:
        cls = p.blown_classes(a)
        if not cls[0]:
            parts_out[a] = [()] * r_rest
            continue
        verts = {v for c in cls for v in c}
        ga = Graph(p.n, frozenset(e for e in rewired.edges if e[0] in verts))
        out = solver(ga, cls, cfg)
        nodes += out.nodes
        if not out.found:
            return SearchOutcome(out.verdict, None, nodes, time.monotonic() - started)
        parts_out[a] = out.certificate
    factors = [merge_partite_factors(parts_out[3][t], parts_out[4][t], parts_out[5][t], rw) for t in range(r_rest)]
    spec = FactorSpec.single(f.cycle_type(), r_rest)
    report = verify_decomposition(rest, factors, spec)
    if not report:
        raise AssertionError(f"absorption produced an invalid decomposition: {report}")
    return SearchOutcome(Verdict.FOUND, factors, nodes, time.monotonic() - started)
