"""Independent reference checks used by the tests.

Nothing here calls into the search kernel or the verifier of the package;
the conditions are restated from scratch on plain Python sets and ints so a
bug in the implementation cannot hide behind the same bug in its check.
"""

from __future__ import annotations

import itertools
import re
from collections import Counter


def edge(u, v):
    return (u, v) if u < v else (v, u)


def cycle_edges(cycle):
    L = len(cycle)
    return {edge(cycle[i], cycle[(i + 1) % L]) for i in range(L)}


def complete_edges(n):
    return {(u, v) for u in range(n) for v in range(u + 1, n)}


def complete_minus_pm_edges(n):
    return complete_edges(n) - {(2 * i, 2 * i + 1) for i in range(n // 2)}


def components(vertices, edges):
    """Connected components by union-find."""
    parent = {v: v for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        parent[find(u)] = find(v)
    comps = {}
    for v in vertices:
        comps.setdefault(find(v), set()).add(v)
    return list(comps.values())


def two_factor_type(n, edges):
    """Sorted cycle lengths if ``edges`` is a spanning 2-regular graph on ``range(n)``, else None."""
    deg = Counter()
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    if any(deg[v] != 2 for v in range(n)) or len(deg) != n:
        return None
    return tuple(sorted(len(c) for c in components(range(n), edges)))


# ---------------------------------------------------------------------------
# decompositions


def decomposition_problems(n, host_edges, factors, spec):
    """Everything wrong with ``factors`` as a decomposition of the host; ``spec`` maps type -> multiplicity."""
    problems = []
    seen = {}
    types = Counter()
    for k, cycles in enumerate(factors):
        es = set()
        for c in cycles:
            es |= cycle_edges(c)
        t = two_factor_type(n, es)
        if t is None or sum(len(c) for c in cycles) != n:
            problems.append(f"factor {k} is not a 2-factor")
            continue
        types[t] += 1
        for e in es:
            if e not in host_edges:
                problems.append(f"factor {k} uses non-host edge {e}")
            if e in seen:
                problems.append(f"edge {e} in factors {seen[e]} and {k}")
            seen[e] = k
    if set(seen) != set(host_edges):
        problems.append(f"{len(set(host_edges) - set(seen))} host edges uncovered")
    want = Counter({tuple(sorted(t)): m for t, m in spec.items()})
    if types != want:
        problems.append(f"types {dict(types)} != {dict(want)}")
    return problems


def all_two_factors(n, host_edges):
    """Every spanning 2-regular subgraph of the host, as (edge bitmask, sorted type)."""
    index = {e: i for i, e in enumerate(sorted(host_edges))}
    out = []
    for combo in itertools.combinations(sorted(host_edges), n):
        t = two_factor_type(n, combo)
        if t is not None:
            out.append((sum(1 << index[e] for e in combo), t))
    return out, index


def naive_decomposable(n, host_edges, spec):
    """Exact cover of the host by 2-factors with the requested type multiset.

    Enumerates every 2-factor up front (fine for n <= 7), then branches on the
    factors covering the lowest uncovered edge.
    """
    host_edges = set(host_edges)
    need = Counter({tuple(sorted(t)): m for t, m in spec.items()})
    if sum(need.values()) * n != len(host_edges):
        return False
    factors, index = all_two_factors(n, host_edges)
    full = (1 << len(index)) - 1
    # a factor containing the lowest uncovered edge need not contain lower ones,
    # so index every factor under every one of its edges
    by_edge = {i: [] for i in range(len(index))}
    for mask, t in factors:
        if need[t]:
            m = mask
            while m:
                b = m & -m
                by_edge[b.bit_length() - 1].append((mask, t))
                m ^= b

    def rec(covered):
        if covered == full:
            return True
        free = ~covered & full
        low = (free & -free).bit_length() - 1
        for mask, t in by_edge[low]:
            if mask & covered or not need[t]:
                continue
            need[t] -= 1
            ok = rec(covered | mask)
            need[t] += 1
            if ok:
                return True
        return False

    return rec(0)


def walecki(n):
    """Walecki's Hamilton decomposition of K_n, n odd: hub n-1 and a zigzag on Z_{n-1}."""
    m = n - 1
    cycles = []
    for i in range(m // 2):
        zig = [i]
        for k in range(1, m):
            step = (k + 1) // 2
            zig.append((i + step) % m if k % 2 else (i - step) % m)
        cycles.append([(m,) + tuple(zig)])
    return cycles


# ---------------------------------------------------------------------------
# the F-partition digraphs, restated from their definitions


PARTS = (3, 4, 5)


def reduced_digraph():
    """Arcs X^a_i -> X^a_{i+1} (2 <= i < a) and X^a_a -> X^{a,b}_1 -> X^b_2."""
    arcs = set()
    for a in PARTS:
        arcs |= {(f"X{a}_{i}", f"X{a}_{i + 1}") for i in range(2, a)}
        for b in PARTS:
            arcs.add((f"X{a}_{a}", f"X{a}{b}_1"))
            arcs.add((f"X{a}{b}_1", f"X{b}_2"))
    return arcs


def hat_digraph():
    """Three directed cycles X^a_1 -> ... -> X^a_a -> X^a_1."""
    return {(f"X{a}_{i}", f"X{a}_{i % a + 1}") for a in PARTS for i in range(1, a + 1)}


def hat_label(label):
    m = re.fullmatch(r"X(\d)(\d)_1", label)
    return f"X{m.group(1)}_1" if m else label


def balance_r(edges, class_of, arcs, vertices):
    """The r with every vertex of in- and out-degree r along ``arcs``; None if unbalanced or off the digraph."""
    out, inn = Counter(), Counter()
    for u, v in edges:
        cu, cv = class_of[u], class_of[v]
        if (cu, cv) in arcs:
            out[u] += 1
            inn[v] += 1
        elif (cv, cu) in arcs:
            out[v] += 1
            inn[u] += 1
        else:
            return None
    rs = {out[v] for v in vertices} | {inn[v] for v in vertices}
    return rs.pop() if len(rs) == 1 else None


def internal_balance_equations(edges, class_of):
    """Every (left, right) pair of class-edge totals that internal balance forces equal."""
    e = Counter()
    for u, v in edges:
        assert class_of[u] == class_of[v]
        e[class_of[u]] += 1
    eqs = {}
    for a in PARTS:
        first = sum(e[f"X{a}{b}_1"] for b in PARTS)
        for i in range(2, a + 1):
            eqs[f"X{a}_1", f"X{a}_{i}"] = (first, e[f"X{a}_{i}"])
    for a, b in itertools.combinations(PARTS, 2):
        eqs[f"X{a}{b}_1", f"X{b}{a}_1"] = (e[f"X{a}{b}_1"], e[f"X{b}{a}_1"])
    return eqs


def named_equation_is_violated(message, edges, class_of):
    """Parse ``e(A) = x != e(B) = y`` out of ``message`` and confirm it against the counts."""
    m = re.search(r"e\((\w+)\) = (\d+) != e\((\w+)\) = (\d+)", message)
    if not m:
        return False
    left, x, right, y = m.group(1), int(m.group(2)), m.group(3), int(m.group(4))
    eqs = internal_balance_equations(edges, class_of)
    got = eqs.get((left, right))
    return got is not None and got == (x, y) and x != y


# ---------------------------------------------------------------------------
# allocation conditions


def _assigned_cycle_edges(cycles):
    out = set()
    for c in cycles:
        out |= cycle_edges(c)
    return out


def induced_matching(cycles, chosen):
    ends = [x for e in chosen for x in e]
    if len(ends) != len(set(ends)):
        return False
    which = {x: k for k, e in enumerate(chosen) for x in e}
    return not any(
        x in which and y in which and which[x] != which[y] for x, y in _assigned_cycle_edges(cycles)
    )


def simple_alloc_problems(cycles, sizes, assign):
    t = len(sizes)
    probs = []
    if [sum(1 for v in assign if assign[v] == i) for i in range(t)] != list(sizes):
        probs.append("(i)")
    es = _assigned_cycle_edges(cycles)
    if any(abs(assign[x] - assign[y]) > 1 for x, y in es):
        probs.append("(ii)")
    cross = [(x, y) for x, y in es if assign[x] != assign[y]]
    if not induced_matching(cycles, cross):
        probs.append("(iii)")
    for i in range(t - 1):
        if sum(1 for x, y in cross if {assign[x], assign[y]} == {i, i + 1}) != 4:
            probs.append(f"(iv) at {i}")
    return probs


def good_matching_problems(edges, parts, cap):
    cl = {v: i for i, p in enumerate(parts) for v in p}
    probs = []
    ends = [x for e in edges for x in e]
    if len(ends) != len(set(ends)):
        probs.append("not a matching")
    if len(edges) > cap:
        probs.append("over cap")
    t = len(parts)
    pair = Counter()
    for u, v in edges:
        if cl[u] == cl[v]:
            probs.append("internal edge")
        pair[frozenset((cl[u], cl[v]))] += 1
    for i, j in itertools.combinations(range(t), 2):
        if pair[frozenset((i, j))] < 4:
            probs.append(f"pair {i},{j} has {pair[frozenset((i, j))]}")
    for i in range(t):
        if sum(c for k, c in pair.items() if i in k) % 2:
            probs.append(f"odd degree at {i}")
    return probs


def crossing_problems(cycles, m_edges, parts, sigma, prescribed):
    cl = {v: i for i, p in enumerate(parts) for v in p}
    probs = []
    t = len(parts)
    if [sum(1 for v in sigma if sigma[v] == i) for i in range(t)] != [len(p) for p in parts]:
        probs.append("(a)")
    es = _assigned_cycle_edges(cycles)
    cross = [(x, y) for x, y in es if sigma[x] != sigma[y]]
    if not induced_matching(cycles, cross):
        probs.append("(b)")
    for i, j in itertools.combinations(range(t), 2):
        want = sum(1 for u, v in m_edges if {cl[u], cl[v]} == {i, j})
        got = sum(1 for x, y in cross if {sigma[x], sigma[y]} == {i, j})
        if want != got:
            probs.append(f"(c) at {i},{j}")
    if {edge(prescribed[x], prescribed[y]) for x, y in cross} != {edge(*e) for e in m_edges}:
        probs.append("image")
    return probs
