"""Seeded property suites for the constructive lemmas, shared by the CLI harness.

Every suite takes ``(n, seed, instances)`` and returns a :class:`SuiteResult`
whose ``failures`` name the instance and the property that broke.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

import networkx as nx

from . import gadget as gd
from .absorption import allocation, atoms as at, edge_stack, matchings, surgery
from .graph_core import CycleFactor, FactorSpec, Graph, balance_profile, norm_edge, verify_decomposition
from .partitions import PARTS, CyclicPartition


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def expect(self, cond: bool, what: str) -> None:
        self.checked += 1
        if not cond:
            self.failures.append(what)


# ---------------------------------------------------------------------------
# generators


ALL_PAIRS_36 = CyclicPartition((3, 3, 4, 4, 5, 5, 3, 5, 4))


def random_cycle_factor(n: int, rng: random.Random, min_len: int = 3, max_len: int | None = None) -> CycleFactor:
    """Random labelled 2-factor on ``n`` vertices with cycle lengths in ``[min_len, max_len]``."""
    max_len = max_len or n
    lens, rest = [], n
    while rest:
        hi = min(max_len, rest)
        L = rng.randint(min_len, hi)
        if 0 < rest - L < min_len:
            L = rest if rest <= max_len else rest - min_len
        lens.append(L)
        rest -= L
    vs = list(range(n))
    rng.shuffle(vs)
    cycles, pos = [], 0
    for L in lens:
        cycles.append(tuple(vs[pos : pos + L]))
        pos += L
    return CycleFactor(n, cycles)


def all_pairs_factor(copies: int, rng: random.Random | None = None) -> tuple[CycleFactor, dict[int, CyclicPartition]]:
    """``copies`` disjoint 36-cycles whose partition uses every ordered pair of parts."""
    n = 36 * copies
    vs = list(range(n))
    if rng is not None:
        rng.shuffle(vs)
    cycles = [tuple(vs[36 * k : 36 * k + 36]) for k in range(copies)]
    return CycleFactor(n, cycles), {36: ALL_PAIRS_36}


def random_copy(f: CycleFactor, hom: gd.FHomomorphism, p: gd.FPartition, rng: random.Random) -> set[tuple[int, int]]:
    """Edges of a class-preserving image of ``F``; it is 1-balanced."""
    pools = {lab: list(vs) for lab, vs in p.classes.items()}
    for vs in pools.values():
        rng.shuffle(vs)
    phi = {}
    for x in range(f.n):
        phi[x] = pools[hom.sigma[x]].pop()
    return {norm_edge(phi[x], phi[y]) for x, y in hom.arcs}


def random_partite_factor(classes, rng: random.Random) -> list[tuple[int, ...]]:
    cols = [list(c) for c in classes]
    for c in cols[1:]:
        rng.shuffle(c)
    return [tuple(col[k] for col in cols) for k in range(len(cols[0]))] if cols and cols[0] else []


def reduced_universe_edges(p: gd.FPartition) -> list[tuple[int, int]]:
    out = []
    for a, b in sorted(gd.R_ARCS):
        for u in p.classes[a]:
            for v in p.classes[b]:
                out.append(norm_edge(u, v))
    return out


# ---------------------------------------------------------------------------
# suites


def check_rewiring(n: int = 120, seed: int = 0, instances: int = 5, subgraphs: int = 50, balanced: int = 10) -> SuiteResult:
    res = SuiteResult("rewiring")
    rng = random.Random(seed)
    for k in range(instances):
        f = random_cycle_factor(rng.randint(3, n), rng)
        p = gd.build_f_partition(f)
        hom = gd.build_f_homomorphism(f, p)
        rw = gd.build_rewiring(f, p, seed=rng.randrange(2**31))
        tag = f"instance {k} (n={f.n})"
        res.expect(not gd.homomorphism_report(f, p, hom), f"{tag}: homomorphism facts")
        universe = reduced_universe_edges(p)
        for s in range(subgraphs):
            g = Graph(f.n, frozenset(rng.sample(universe, rng.randint(0, min(len(universe), 3 * f.n)))))
            back = gd.unrewire(gd.rewire(g, rw), rw)
            res.expect(back.edges == g.edges, f"{tag}: unrewire(rewire(g)) != g on subgraph {s}")
            r1 = balance_profile(p.oriented(g), range(f.n)).r
            r2 = balance_profile(p.oriented_hat(gd.rewire(g, rw)), range(f.n)).r
            res.expect(r1 == r2, f"{tag}: balance {r1} vs rewired {r2} on subgraph {s}")
        for s in range(balanced):
            edges: set[tuple[int, int]] = set()
            r = 0
            for _ in range(rng.randint(1, 3)):
                cp = random_copy(f, hom, p, rng)
                if cp.isdisjoint(edges):
                    edges |= cp
                    r += 1
            g = Graph(f.n, frozenset(edges))
            r1 = balance_profile(p.oriented(g), range(f.n)).r
            r2 = balance_profile(p.oriented_hat(gd.rewire(g, rw)), range(f.n)).r
            res.expect(r1 == r and r2 == r, f"{tag}: balanced subgraph {s} gives {r1}/{r2}, expected {r}")
        triple = [random_partite_factor(p.blown_classes(a), rng) for a in PARTS]
        merged = gd.merge_partite_factors(*triple, rw)
        res.expect(merged.cycle_type() == f.cycle_type(), f"{tag}: merged cycle type")
        cyc_of = {v: frozenset(c) for c in merged.cycles for v in c}
        for block, vs in zip(rw.blocks, gd.merged_vertex_sets(*triple, rw)):
            res.expect(cyc_of[block[0]] == vs, f"{tag}: merged cycle through block {block} has the wrong vertices")
    return res


def _atom_partition(copies: int) -> gd.FPartition:
    f, fam = all_pairs_factor(copies)
    return gd.build_f_partition(f, family=fam)


def random_atom(p: gd.FPartition, shape, rng: random.Random, taken: set[tuple[int, int]]) -> at.Atom | None:
    edges = []
    for lab in at.d_cycle(shape):
        vs = p.classes[lab]
        for _ in range(20):
            u, v = rng.sample(vs, 2)
            if norm_edge(u, v) not in taken:
                break
        else:
            return None
        edges.append(norm_edge(u, v))
    return at.Atom(shape, tuple(edges))


def check_atoms(n: int = 360, seed: int = 0, instances: int = 50) -> SuiteResult:
    res = SuiteResult("atoms")
    rng = random.Random(seed)
    p = _atom_partition(max(2, n // 36))
    for k in range(instances):
        taken: set[tuple[int, int]] = set()
        for _ in range(rng.randint(0, 20)):
            o = random_atom(p, rng.choice(at.SHAPES), rng, taken)
            if o is not None:
                taken.update(o.edges)
        h = Graph(p.n, frozenset(taken))
        res.expect(at.is_internally_balanced(h, p), f"union {k} reported unbalanced")
        got = at.decompose_into_atoms(h, p)
        union = [e for o in got for e in o.edges]
        res.expect(sorted(union) == sorted(h.edges), f"union {k}: atoms do not re-form h")
        for o in got:
            res.expect(
                all(p.class_of[e[0]] == lab for e, lab in zip(o.edges, o.classes)), f"union {k}: atom edge in wrong class"
            )
        # a random extra edge breaks balance
        lab = rng.choice(list(p.classes))
        u, v = rng.sample(p.classes[lab], 2)
        if norm_edge(u, v) not in taken:
            bad = Graph(p.n, frozenset(taken | {norm_edge(u, v)}))
            why = at.balance_violation(bad, p)
            res.expect(why is not None and not at.is_internally_balanced(bad, p), f"union {k}+edge accepted")
            try:
                at.decompose_into_atoms(bad, p)
                res.expect(False, f"union {k}+edge decomposed")
            except ValueError as exc:
                res.expect(why is not None and why in str(exc), f"union {k}+edge error does not name the equation")
    return res


def check_edge_stack(n: int = 240, seed: int = 0, instances: int = 8) -> SuiteResult:
    res = SuiteResult("edge-stack")
    rng = random.Random(seed)
    for k in range(instances):
        d = rng.randint(1, 8)
        if n * d % 2:
            d += 1 if d < 8 else -1
        g = nx.random_regular_graph(d, n, seed=rng.randrange(2**31))
        graph = Graph(n, frozenset(norm_edge(u, v) for u, v in g.edges()))
        order = edge_stack.matching_sequence(graph)
        res.expect(sorted(order) == sorted(graph.edges), f"instance {k}: ordering is not a permutation of E")
        res.expect(edge_stack.windows_are_matchings(order, n // 12), f"instance {k} (d={d}): a window is not a matching")
    return res


def surgery_instance(rng: random.Random, copies: int = 2):
    """F made of 600-cycles, its homomorphism, and disjoint atoms with targets."""
    n = 600 * copies
    vs = list(range(n))
    rng.shuffle(vs)
    f = CycleFactor(n, [tuple(vs[600 * k : 600 * k + 600]) for k in range(copies)])
    p = gd.build_f_partition(f)
    hom = gd.build_f_homomorphism(f, p)
    need = {ell: rng.randint(0, 2) for ell in surgery.TARGET_LENGTHS}
    targets = surgery.find_targets(f, hom, need)
    used: set[int] = set()
    atoms, tlist = [], []
    for ell, ts in targets.items():
        for tgt in ts:
            shape = at.SHAPE_OF_LENGTH[ell]
            edges = []
            for lab in at.d_cycle(shape):
                free = [v for v in p.classes[lab] if v not in used]
                u, v = rng.sample(free, 2)
                used.update((u, v))
                edges.append((u, v))
            atoms.append(at.Atom(shape, tuple(edges)))
            tlist.append(tgt)
    return f, p, hom, atoms, tlist


def check_surgery(n: int = 1200, seed: int = 0, instances: int = 20) -> SuiteResult:
    res = SuiteResult("surgery")
    rng = random.Random(seed)
    for k in range(instances):
        f, p, hom, atoms, targets = surgery_instance(rng, max(2, n // 600))
        out = surgery.absorb_atoms_into_homomorphism(f, hom, atoms, targets)
        for msg in surgery.surgery_report(f, hom, atoms, out):
            res.expect(False, f"instance {k}: {msg}")
        res.expect(True, f"instance {k}")
    return res


def random_long_factor(sizes, rng: random.Random, min_len: int = 30, max_len: int = 200) -> CycleFactor:
    return random_cycle_factor(sum(sizes), rng, min_len, max_len)


def check_simple_alloc(n: int = 300, seed: int = 0, instances: int = 20) -> SuiteResult:
    res = SuiteResult("simple-alloc")
    rng = random.Random(seed)
    for k in range(instances):
        t = rng.randint(1, 5)
        sizes = [rng.randint(50, max(50, n // t)) for _ in range(t)]
        f = random_long_factor(sizes, rng)
        assign = allocation.allocate_long_cycles(f, sizes)
        for msg in allocation.simple_alloc_report(f, sizes, assign):
            res.expect(False, f"instance {k}: {msg}")
        res.expect(True, f"instance {k}")
    return res


def random_crossing_graph(rng: random.Random, t: int, size: int, lo: int = 20, hi: int = 40):
    """Union of random matchings between every pair of clusters, with even crossing degrees."""
    parts = [list(range(size * i, size * i + size)) for i in range(t)]
    edges = set()
    for i in range(t):
        for j in range(i + 1, t):
            for _ in range(3):
                a, b = parts[i][:], parts[j][:]
                rng.shuffle(a)
                rng.shuffle(b)
                m = rng.randint(lo, hi)
                edges.update(norm_edge(u, v) for u, v in zip(a[:m], b[:m]))
    el = sorted(edges)
    while True:
        deg = [0] * t
        for u, v in el:
            deg[u // size] += 1
            deg[v // size] += 1
        odd = [i for i in range(t) if deg[i] % 2]
        if not odd:
            break
        i, j = odd[0], odd[1]
        el.remove(next(e for e in el if {e[0] // size, e[1] // size} == {i, j}))
    return Graph(t * size, frozenset(el)), parts


def check_good_matchings(n: int = 300, seed: int = 0, instances: int = 20) -> SuiteResult:
    res = SuiteResult("good-matchings")
    rng = random.Random(seed)
    for k in range(instances):
        t = rng.randint(2, 4)
        l, parts = random_crossing_graph(rng, t, max(40, n // t))
        m0, ms = matchings.decompose_into_good_matchings(l, parts)
        allm = [m0] + ms
        union = [e for m in allm for e in m.edges]
        res.expect(sorted(union) == sorted(l.edges), f"instance {k}: matchings do not partition E(L)")
        for idx, m in enumerate(allm):
            for msg in m.violations(parts):
                res.expect(False, f"instance {k}, matching {idx}: {msg}")
    return res


def random_good_matching(rng: random.Random, parts, consecutive_min: int = 4, hi: int = 9):
    t = len(parts)
    while True:
        cnt = {(i, j): rng.randint(consecutive_min if j == i + 1 else 0, hi) for i in range(t) for j in range(i + 1, t)}
        deg = [sum(c for ij, c in cnt.items() if i in ij) for i in range(t)]
        if all(d % 2 == 0 for d in deg):
            break
    free = [list(p) for p in parts]
    for fr in free:
        rng.shuffle(fr)
    return [(free[i].pop(), free[j].pop()) for (i, j), c in cnt.items() for _ in range(c)]


def check_crossing_alloc(n: int = 900, seed: int = 0, instances: int = 20) -> SuiteResult:
    res = SuiteResult("crossing-alloc")
    rng = random.Random(seed)
    for k in range(instances):
        t = rng.randint(2, 4)
        sizes = [rng.randint(200, max(200, n // t)) for _ in range(t)]
        parts, pos = [], 0
        for s in sizes:
            parts.append(list(range(pos, pos + s)))
            pos += s
        m = random_good_matching(rng, parts, hi=7)
        short = random_cycle_factor(sum(sizes) // 4, rng, 3, 15 * t - 1)
        long_ = random_cycle_factor(sum(sizes) - short.n, rng, 15 * t, 300)
        f = CycleFactor(sum(sizes), list(short.cycles) + [tuple(v + short.n for v in c) for c in long_.cycles])
        out = allocation.crossing_allocation(f, m, parts)
        for msg in allocation.crossing_report(f, m, parts, out):
            res.expect(False, f"instance {k}: {msg}")
        res.expect(True, f"instance {k}")
    return res


def check_absorber(n: int = 72, seed: int = 0, instances: int = 2, r: int = 3) -> SuiteResult:
    res = SuiteResult("absorber")
    rng = random.Random(seed)
    from .solver import SearchConfig

    for k in range(instances):
        f, fam = all_pairs_factor(max(1, n // 36), rng)
        p = gd.build_f_partition(f, family=fam)
        ab = gd.build_absorber(f, p, gd.AbsorberConfig(r, gd.PLANTED, rng.randrange(2**31)))
        res.expect(gd.balance_of(ab.graph, p) == r, f"instance {k}: absorber is not {r}-balanced")
        planted = set()
        for a in PARTS:
            for fac in ab.blown[a].witness:
                planted |= gd._factor_edges(fac)
        res.expect(gd.unrewire(Graph(p.n, frozenset(planted)), ab.rewiring).edges == ab.graph.edges, f"instance {k}: planted union")
        leftover = gd.merge_partite_factors(*ab.planted_triple(0), ab.rewiring).graph()
        out = gd.absorb_balanced_leftover(ab, leftover, f, SearchConfig(timeout=120))
        res.expect(out.found and len(out.certificate) == r - 1, f"instance {k}: absorption gave {out.verdict}")
        if out.found:
            rep = verify_decomposition(ab.graph.minus(leftover), out.certificate, FactorSpec.single(f.cycle_type(), r - 1))
            res.expect(bool(rep), f"instance {k}: {rep}")
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "rewiring": check_rewiring,
    "atoms": check_atoms,
    "edge-stack": check_edge_stack,
    "surgery": check_surgery,
    "simple-alloc": check_simple_alloc,
    "good-matchings": check_good_matchings,
    "crossing-alloc": check_crossing_alloc,
    "absorber": check_absorber,
}
