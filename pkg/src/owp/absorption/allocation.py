"""Assigning the vertices of long cycles to clusters with few, controlled crossing edges.

Clusters are numbered ``0 .. t-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import networkx as nx

from ..graph_core import CycleFactor, norm_edge

Cycles = Sequence[Sequence[int]]


class AllocationError(ValueError):
    pass


def _cycles(f: CycleFactor | Cycles) -> list[tuple[int, ...]]:
    return [tuple(c) for c in (f.cycles if isinstance(f, CycleFactor) else f)]


def _cycle_edges(cycles: Cycles) -> list[tuple[int, int]]:
    return [(c[i], c[(i + 1) % len(c)]) for c in cycles for i in range(len(c))]


def _single_cycle_window(owner: list[int], lo: int, hi: int, first: bool) -> list[int]:
    """Six consecutive positions in ``[lo, hi]`` on one cycle, as early (or late) as possible."""
    starts = range(lo, hi - 4) if first else range(hi - 5, lo - 1, -1)
    for s in starts:
        if owner[s] == owner[s + 5]:
            return list(range(s, s + 6))
    raise AllocationError(f"no single-cycle window of six positions in [{lo}, {hi}]")


def _run_lengths(counts: list[int], mult: list[int]) -> list[tuple[int, int]]:
    """Runs ``(cluster, length)`` of one cycle visiting clusters ``p..q`` with counts ``counts``.

    ``mult[k]`` in {1, 2} is half the number of crossings between the ``k``-th
    and ``k+1``-th visited clusters. The walk goes up with a detour back for
    every doubled pair, then comes straight down.
    """
    m = len(counts)
    if m == 1:
        return [(0, counts[0])]
    walk = []
    for k in range(m - 1):
        walk.append(k)
        if mult[k] == 2:
            walk.extend([k + 1, k])
    walk.append(m - 1)
    walk.extend(range(m - 2, 0, -1))
    runs_of = [walk.count(k) for k in range(m)]
    sizes = {}
    for k in range(m):
        if counts[k] < 3 * runs_of[k]:
            raise AllocationError(f"{counts[k]} vertices cannot fill {runs_of[k]} runs of at least three")
        base, extra = divmod(counts[k], runs_of[k])
        sizes[k] = [base + (1 if i < extra else 0) for i in range(runs_of[k])]
    out = []
    for k in walk:
        out.append((k, sizes[k].pop(0)))
    return out


def allocate_long_cycles(f: CycleFactor | Cycles, sizes: Sequence[int]) -> dict[int, int]:
    """Assign vertices to clusters so consecutive clusters share exactly four crossing edges.

    Lay the cycles out in order and cut the line into intervals ``I_i`` of
    the prescribed sizes; swap a six-vertex block at the end of each interval
    with one at the start of the next; then rebuild each cycle from its
    per-cluster counts so that crossing edges are far apart.
    """
    cycles = _cycles(f)
    sizes = list(sizes)
    t = len(sizes)
    n = sum(len(c) for c in cycles)
    if sum(sizes) != n:
        raise AllocationError(f"sizes sum to {sum(sizes)}, F has {n} vertices")
    if any(len(c) < 30 for c in cycles):
        raise AllocationError("every cycle must have length at least 30")
    if t == 1:
        return {v: 0 for c in cycles for v in c}
    if any(s < 50 for s in sizes):
        raise AllocationError("every cluster needs at least 50 vertices")
    owner = [j for j, c in enumerate(cycles) for _ in c]
    bounds, pos = [], 0
    for s in sizes:
        bounds.append((pos, pos + s - 1))
        pos += s
    minus = [_single_cycle_window(owner, lo, min(hi, lo + 10), True) for lo, hi in bounds]
    plus = [_single_cycle_window(owner, max(lo, hi - 10), hi, False) for lo, hi in bounds]
    f2 = [0] * n
    for i, (lo, hi) in enumerate(bounds):
        for k in range(lo, hi + 1):
            f2[k] = i
    for i in range(t - 1):
        for k in plus[i]:
            f2[k] = i + 1
        for k in minus[i + 1]:
            f2[k] = i
    counts = [[0] * t for _ in cycles]
    for k in range(n):
        counts[owner[k]][f2[k]] += 1
    sharing = [[j for j in range(len(cycles)) if counts[j][i] and counts[j][i + 1]] for i in range(t - 1)]
    for i, js in enumerate(sharing):
        if len(js) not in (1, 2):
            raise AllocationError(f"clusters {i} and {i + 1} meet in {len(js)} cycles")
    out: dict[int, int] = {}
    for j, cyc in enumerate(cycles):
        present = [i for i in range(t) if counts[j][i]]
        lo, hi = present[0], present[-1]
        if present != list(range(lo, hi + 1)):
            raise AllocationError(f"cycle {j} meets non-consecutive clusters {present}")
        mult = [2 if len(sharing[i]) == 1 else 1 for i in range(lo, hi)]
        runs = _run_lengths([counts[j][i] for i in range(lo, hi + 1)], mult)
        pos = 0
        for k, length in runs:
            for v in cyc[pos : pos + length]:
                out[v] = lo + k
            pos += length
    return out


def crossing_edges(cycles: Cycles, assign: Mapping[int, int]) -> list[tuple[int, int]]:
    return [e for e in _cycle_edges(cycles) if assign[e[0]] != assign[e[1]]]


def is_induced_matching(cycles: Cycles, edges: Iterable[tuple[int, int]]) -> bool:
    edges = list(edges)
    ends = [x for e in edges for x in e]
    if len(ends) != len(set(ends)):
        return False
    owner = {x: k for k, e in enumerate(edges) for x in e}
    for x, y in _cycle_edges(cycles):
        if x in owner and y in owner and owner[x] != owner[y]:
            return False
    return True


def simple_alloc_report(f: CycleFactor | Cycles, sizes: Sequence[int], assign: Mapping[int, int]) -> list[str]:
    """Violations of the four allocation conditions."""
    cycles = _cycles(f)
    t = len(sizes)
    problems = []
    got = [0] * t
    for v in assign:
        got[assign[v]] += 1
    if got != list(sizes):
        problems.append(f"(i) cluster sizes {got} != {list(sizes)}")
    edges = _cycle_edges(cycles)
    if any(abs(assign[x] - assign[y]) > 1 for x, y in edges):
        problems.append("(ii) an edge joins non-consecutive clusters")
    cross = crossing_edges(cycles, assign)
    if not is_induced_matching(cycles, cross):
        problems.append("(iii) crossing edges are not an induced matching")
    for i in range(t - 1):
        k = sum(1 for x, y in cross if {assign[x], assign[y]} == {i, i + 1})
        if k != 4:
            problems.append(f"(iv) {k} crossing edges between clusters {i} and {i + 1}")
    return problems


# ---------------------------------------------------------------------------
# crossing allocation


@dataclass(frozen=True)
class CrossingAllocation:
    sigma: dict[int, int]  # every vertex of F -> cluster
    crossing: tuple[tuple[int, int], ...]  # F-edges whose ends lie in different clusters
    prescribed: dict[int, int]  # ends of crossing edges -> vertices of the matching
    parity_cycles: tuple[tuple[int, ...], ...]
    defects: dict[tuple[int, int], int]


def _pair_counts(m_edges: Iterable[tuple[int, int]], cluster_of: Mapping[int, int], t: int) -> dict[tuple[int, int], list]:
    by: dict[tuple[int, int], list] = {(i, j): [] for i in range(t) for j in range(i + 1, t)}
    for u, v in sorted(norm_edge(*e) for e in m_edges):
        cu, cv = cluster_of[u], cluster_of[v]
        if cu == cv:
            raise AllocationError(f"matching edge {(u, v)} lies inside cluster {cu}")
        by[min(cu, cv), max(cu, cv)].append((u, v))
    return by


def parity_cycles(odd_pairs: Iterable[tuple[int, int]]) -> list[tuple[int, ...]]:
    """Decompose the Eulerian graph of odd pairs into cycles, each starting at its least vertex."""
    g = nx.Graph()
    g.add_edges_from(odd_pairs)
    out = []
    while g.number_of_edges():
        start = min(v for v in g if g.degree(v))
        cyc = [u for u, _ in nx.find_cycle(g, source=start)]
        g.remove_edges_from(nx.utils.pairwise(cyc, cyclic=True))
        k = cyc.index(min(cyc))
        out.append(tuple(cyc[k:] + cyc[:k]))
    return out


def _targets(cycles: Cycles, f_assign: Mapping[int, int], blocked: set[int], i: int, span: int) -> list[tuple[int, ...]]:
    out = []
    for cyc in cycles:
        # start just after an ineligible vertex so no run wraps around
        bad = [k for k, v in enumerate(cyc) if f_assign[v] != i or v in blocked]
        if bad:
            cyc = tuple(cyc[bad[0] + 1 :]) + tuple(cyc[: bad[0] + 1])
        run: list[int] = []
        for v in list(cyc) + [None]:
            if v is not None and f_assign[v] == i and v not in blocked:
                run.append(v)
                continue
            for s in range(0, len(run) - span + 1, span):
                out.append(tuple(run[s : s + span]))
            run = []
    return out


def crossing_allocation(
    f: CycleFactor,
    m_edges: Iterable[tuple[int, int]],
    parts: Sequence[Sequence[int]],
) -> CrossingAllocation:
    """Place F on the clusters so its crossing edges match the good matching pair for pair.

    Short cycles are put whole into clusters; long cycles go through
    :func:`allocate_long_cycles` on corrected sizes, and then three-vertex
    blocks of targets move into other clusters to create the extra crossings.
    """
    t = len(parts)
    sizes = [len(p) for p in parts]
    if sum(sizes) != f.n:
        raise AllocationError(f"clusters hold {sum(sizes)} vertices, F has {f.n}")
    cluster_of = {v: i for i, p in enumerate(parts) for v in p}
    m_edges = list(m_edges)
    by_pair = _pair_counts(m_edges, cluster_of, t)
    e = {ij: len(es) for ij, es in by_pair.items()}
    for i in range(t - 1):
        if e[i, i + 1] < 4:
            raise AllocationError(f"only {e[i, i + 1]} matching edges between clusters {i} and {i + 1}")
    for i in range(t):
        deg = sum(c for (a, b), c in e.items() if i in (a, b))
        if deg % 2:
            raise AllocationError(f"odd crossing degree {deg} at cluster {i}")
    threshold = 15 * t
    short = sorted((c for c in f.cycles if len(c) < threshold), key=len, reverse=True)
    long_ = [c for c in f.cycles if len(c) >= threshold]
    sigma: dict[int, int] = {}
    room = list(sizes)
    for c in short:
        i = max(range(t), key=lambda k: (room[k], -k))
        if room[i] < len(c):
            raise AllocationError("short cycles do not fit into the clusters")
        room[i] -= len(c)
        for v in c:
            sigma[v] = i
    n_prime = room
    defect = {}
    for (i, j), c in e.items():
        defect[i, j] = c // 2 - (2 if j == i + 1 else 0)
    pcycles = parity_cycles(ij for ij, c in e.items() if c % 2)
    n_star = list(n_prime)
    for (i, j), d in defect.items():
        n_star[i] += 3 * d
        n_star[j] -= 3 * d
    for cyc in pcycles:
        n_star[cyc[0]] += 3 * (len(cyc) - 1)
        for i in cyc[1:]:
            n_star[i] -= 3
    if t == 1:
        for c in long_:
            for v in c:
                sigma[v] = 0
        return CrossingAllocation(sigma, (), {}, (), {})
    if not long_:
        raise AllocationError("no cycles long enough to carry crossing edges")
    base = allocate_long_cycles(long_, n_star)
    star_ends = {x for ed in crossing_edges(long_, base) for x in ed}
    span = 3 * t + 1
    pool = {i: _targets(long_, base, star_ends, i, span) for i in range(t)}
    need = [sum(defect[i, j] for j in range(i + 1, t)) + sum(1 for c in pcycles if c[0] == i) for i in range(t)]
    for i in range(t):
        if len(pool[i]) < need[i]:
            raise AllocationError(f"{len(pool[i])} disjoint {i}-targets, {need[i]} needed")
    new = dict(base)
    for i in range(t):
        it = iter(pool[i])
        for j in range(i + 1, t):
            for _ in range(defect[i, j]):
                path = next(it)
                for k in (2, 3, 4):  # positions 3, 4, 5
                    new[path[k]] = j
        for cyc in pcycles:
            if cyc[0] != i:
                continue
            path = next(it)
            for k in range(2, len(cyc) + 1):
                for s in range(3):
                    new[path[3 * (k - 1) + s - 1]] = cyc[k - 1]
    sigma.update(new)
    cross = tuple(crossing_edges(_cycles(f), sigma))
    prescribed: dict[int, int] = {}
    by_f: dict[tuple[int, int], list] = {ij: [] for ij in by_pair}
    for x, y in cross:
        a, b = sigma[x], sigma[y]
        by_f[min(a, b), max(a, b)].append((x, y))
    for ij, fe in by_f.items():
        me = by_pair[ij]
        if len(fe) != len(me):
            raise AssertionError(f"{len(fe)} crossing edges for pair {ij}, matching has {len(me)}")
        for (x, y), (u, v) in zip(fe, me):
            for z in (x, y):
                prescribed[z] = u if cluster_of[u] == sigma[z] else v
    return CrossingAllocation(sigma, cross, prescribed, tuple(pcycles), defect)


def crossing_report(f: CycleFactor, m_edges: Iterable[tuple[int, int]], parts: Sequence[Sequence[int]], res: CrossingAllocation) -> list[str]:
    """Violations of the size, induced-matching and pair-count conditions."""
    t = len(parts)
    cluster_of = {v: i for i, p in enumerate(parts) for v in p}
    problems = []
    got = [0] * t
    for v in range(f.n):
        got[res.sigma[v]] += 1
    if got != [len(p) for p in parts]:
        problems.append(f"(a) cluster sizes {got} != {[len(p) for p in parts]}")
    cross = crossing_edges(f.cycles, res.sigma)
    if not is_induced_matching(f.cycles, cross):
        problems.append("(b) crossing edges are not an induced matching")
    want = _pair_counts(m_edges, cluster_of, t)
    for (i, j), es in want.items():
        k = sum(1 for x, y in cross if {res.sigma[x], res.sigma[y]} == {i, j})
        if k != len(es):
            problems.append(f"(c) {k} crossing edges between {i} and {j}, matching has {len(es)}")
    image = {norm_edge(res.prescribed[x], res.prescribed[y]) for x, y in cross}
    if image != {norm_edge(*e) for e in m_edges}:
        problems.append("crossing edges do not map onto the matching")
    if any(cluster_of[res.prescribed[x]] != res.sigma[x] for x in res.prescribed):
        problems.append("a prescribed image lies in the wrong cluster")
    return problems
