"""Splitting a crossing-edge graph into good matchings."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import networkx as nx

from ..graph_core import Graph, norm_edge


class GoodMatchingError(ValueError):
    pass


@dataclass(frozen=True)
class GoodMatching:
    edges: tuple[tuple[int, int], ...]
    cap: int

    def violations(self, parts: Sequence[Sequence[int]]) -> list[str]:
        return good_matching_violations(self.edges, parts, self.cap)


def _cluster_map(parts: Sequence[Sequence[int]]) -> dict[int, int]:
    return {v: i for i, p in enumerate(parts) for v in p}


def good_matching_violations(edges, parts: Sequence[Sequence[int]], cap: int) -> list[str]:
    t = len(parts)
    cl = _cluster_map(parts)
    out = []
    ends = [x for e in edges for x in e]
    if len(ends) != len(set(ends)):
        out.append("not a matching")
    if len(edges) > cap:
        out.append(f"{len(edges)} edges exceed the cap {cap}")
    cnt = {}
    for u, v in edges:
        a, b = sorted((cl[u], cl[v]))
        if a == b:
            out.append(f"edge {(u, v)} inside cluster {a}")
        cnt[a, b] = cnt.get((a, b), 0) + 1
    for i in range(t):
        for j in range(i + 1, t):
            if cnt.get((i, j), 0) < 4:
                out.append(f"{cnt.get((i, j), 0)} edges between clusters {i} and {j}")
    for i in range(t):
        d = sum(c for (a, b), c in cnt.items() if i in (a, b) and a != b)
        if d % 2:
            out.append(f"odd crossing degree at cluster {i}")
    return out


def _edge_pairs(edges: list[tuple[int, int]]) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Pair up disjoint edges through a perfect matching in the complement of the line graph."""
    h = nx.Graph()
    h.add_nodes_from(edges)
    for a in range(len(edges)):
        for b in range(a + 1, len(edges)):
            if not set(edges[a]) & set(edges[b]):
                h.add_edge(edges[a], edges[b])
    m = nx.max_weight_matching(h, maxcardinality=True)
    if 2 * len(m) != len(edges):
        raise GoodMatchingError(f"{len(edges)} edges of a pair cannot be split into disjoint edge pairs")
    return sorted(tuple(sorted(pair)) for pair in m)


def _colour(pairs: dict, s: int, cap: int) -> list[list[tuple[int, int]]] | None:
    """Admissible colouring with ``s`` colours, two edge pairs per colour and cluster pair first."""
    classes: list[list[tuple[int, int]]] = [[] for _ in range(s)]
    touched: list[set[int]] = [set() for _ in range(s)]

    def fits(k: int, pair) -> bool:
        return not touched[k].intersection(x for e in pair for x in e)

    def put(k: int, pair) -> None:
        classes[k].extend(pair)
        touched[k].update(x for e in pair for x in e)

    queues = {ij: list(ps) for ij, ps in pairs.items()}
    for k in range(s):
        for ij, queue in queues.items():
            for _ in range(2):
                idx = next((q for q, pr in enumerate(queue) if fits(k, pr)), None)
                if idx is None:
                    return None
                put(k, queue.pop(idx))
    # remaining pairs go to the least used available colour
    for pr in sorted(pr for q in queues.values() for pr in q):
        avail = [k for k in range(s) if fits(k, pr)]
        if not avail:
            return None
        put(min(avail, key=lambda k: (len(classes[k]), k)), pr)
    if any(len(c) > cap for c in classes):
        return None
    return classes


def decompose_into_good_matchings(
    l: Graph, parts: Sequence[Sequence[int]], cap: int | None = None, colours: int | None = None
) -> tuple[GoodMatching, list[GoodMatching]]:
    """``M_0`` fixes parities; the rest is paired up and coloured into good matchings.

    ``colours`` fixes the number of colour classes; by default counts are
    tried from the largest one that gives every colour two edge pairs of
    every cluster pair downwards.
    """
    t = len(parts)
    n = sum(len(p) for p in parts)
    cap = cap if cap is not None else max(9, -(-n // 8))
    cl = _cluster_map(parts)
    by: dict[tuple[int, int], list[tuple[int, int]]] = {(i, j): [] for i in range(t) for j in range(i + 1, t)}
    for u, v in sorted(l.edges):
        a, b = sorted((cl[u], cl[v]))
        if a == b:
            raise GoodMatchingError(f"edge {(u, v)} lies inside cluster {a}")
        by[a, b].append((u, v))
    for i in range(t):
        d = sum(len(es) for (a, b), es in by.items() if i in (a, b))
        if d % 2:
            raise GoodMatchingError(f"odd crossing degree {d} at cluster {i}")
    # parity-fixing matching
    used: set[int] = set()
    m0: list[tuple[int, int]] = []
    for ij, es in by.items():
        want = 4 + len(es) % 2
        got = [e for e in es if e[0] not in used and e[1] not in used]
        picked: list[tuple[int, int]] = []
        for e in got:
            if len(picked) == want:
                break
            if e[0] not in used and e[1] not in used:
                picked.append(e)
                used.update(e)
        if len(picked) < want:
            raise GoodMatchingError(f"clusters {ij} lack {want} disjoint edges for the parity matching")
        m0.extend(picked)
    in_m0 = set(m0)
    rest = {ij: [e for e in es if e not in in_m0] for ij, es in by.items()}
    pairs = {ij: _edge_pairs(es) for ij, es in rest.items()}
    total = sum(len(es) for es in rest.values())
    if total == 0:
        return GoodMatching(tuple(m0), cap), []
    s_max = min(len(ps) for ps in pairs.values()) // 2
    if s_max < 1:
        raise GoodMatchingError("some pair of clusters has too few edges for two edge pairs per colour")
    # every colour holds at most cap edges and at least two edge pairs of every cluster pair
    s_min = -(-total // cap)
    if s_min > s_max:
        thin = min(pairs, key=lambda ij: len(pairs[ij]))
        raise GoodMatchingError(
            f"{total} edges need {s_min} colours under cap {cap}, but clusters {thin} "
            f"carry only {len(pairs[thin])} edge pairs ({s_max} colours)"
        )
    tries = [colours] if colours is not None else range(s_max, s_min - 1, -1)
    classes = None
    for s in tries:
        classes = _colour(pairs, s, cap)
        if classes is not None:
            break
    if classes is None:
        raise GoodMatchingError("no admissible colouring into good matchings found")
    out = [GoodMatching(tuple(sorted(c)), cap) for c in classes]
    for gm in [GoodMatching(tuple(m0), cap)] + out:
        bad = gm.violations(parts)
        if bad:
            raise GoodMatchingError(f"colour class is not good: {bad[0]}")
    return GoodMatching(tuple(m0), cap), out
