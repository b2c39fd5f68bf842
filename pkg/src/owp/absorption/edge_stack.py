"""Edge orderings of regular graphs whose short windows are matchings, and atom grouping."""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import networkx as nx

from ..gadget import FPartition
from ..graph_core import Graph, norm_edge
from .atoms import SHAPES, Atom, d_cycle


def misra_gries_colouring(edges: Iterable[tuple[int, int]]) -> dict[tuple[int, int], int]:
    """Proper edge colouring with at most ``max degree + 1`` colours."""
    edges = sorted(norm_edge(u, v) for u, v in edges)
    at: dict[int, dict[int, int]] = {}  # vertex -> colour -> neighbour
    nbrs: dict[int, list[int]] = {}
    for u, v in edges:
        nbrs.setdefault(u, []).append(v)
        nbrs.setdefault(v, []).append(u)
        at.setdefault(u, {})
        at.setdefault(v, {})
    delta = max((len(x) for x in nbrs.values()), default=0)
    palette = range(delta + 1)
    colour: dict[tuple[int, int], int] = {}

    def free(v: int) -> int:
        return next(c for c in palette if c not in at[v])

    def is_free(v: int, c: int) -> bool:
        return c not in at[v]

    def paint(u: int, v: int, c: int | None) -> None:
        e = norm_edge(u, v)
        old = colour.pop(e, None)
        if old is not None:
            del at[u][old], at[v][old]
        if c is not None:
            colour[e] = c
            at[u][c] = v
            at[v][c] = u

    for u, v in edges:
        # maximal fan at u starting with the uncoloured edge uv
        fan = [v]
        in_fan = {v}
        grew = True
        while grew:
            grew = False
            for w in nbrs[u]:
                if w in in_fan:
                    continue
                c = colour.get(norm_edge(u, w))
                if c is not None and is_free(fan[-1], c):
                    fan.append(w)
                    in_fan.add(w)
                    grew = True
                    break
        c = free(u)
        d = free(fan[-1])
        # invert the cd-path starting at u
        if c != d:
            path, x, want = [], u, d
            while want in at[x]:
                y = at[x][want]
                path.append((x, y, want))
                x = y
                want = c if want == d else d
            for x, y, col in path:
                paint(x, y, None)
            for x, y, col in path:
                paint(x, y, c if col == d else d)
        # shortest prefix of the fan ending at a vertex where d is free
        k = 0
        while True:
            w = fan[k]
            if is_free(w, d) and all(
                colour.get(norm_edge(u, fan[j + 1])) is not None and is_free(fan[j], colour[norm_edge(u, fan[j + 1])])
                for j in range(k)
            ):
                break
            k += 1
        # rotate the prefix
        for j in range(k):
            nxt = colour[norm_edge(u, fan[j + 1])]
            paint(u, fan[j + 1], None)
            paint(u, fan[j], nxt)
        paint(u, fan[k], d)
    return colour


def colour_classes(edges: Iterable[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    """Matchings of a proper edge colouring, smallest first."""
    col = misra_gries_colouring(edges)
    by: dict[int, list[tuple[int, int]]] = {}
    for e, c in sorted(col.items()):
        by.setdefault(c, []).append(e)
    return sorted(by.values(), key=len)


def window_size(n_vertices: int) -> int:
    return n_vertices // 12


def matching_sequence(g: Graph, vertices: Iterable[int] | None = None) -> list[tuple[int, int]]:
    """Order ``E(g)`` so that every ``floor(n/12)`` consecutive edges are disjoint.

    Colour classes are laid down smallest first; each new class starts with
    edges that avoid the last window of the ordering so far.
    """
    verts = sorted(range(g.n) if vertices is None else set(vertices))
    degs = {g.degree(v) for v in verts}
    if len(degs) > 1:
        raise ValueError(f"graph is not regular on the given vertices (degrees {sorted(degs)})")
    if any(u not in set(verts) or v not in set(verts) for u, v in g.edges):
        raise ValueError("edges leave the given vertex set")
    w = window_size(len(verts))
    order: list[tuple[int, int]] = []
    for m in colour_classes(g.edges):
        if not order or w == 0:
            order.extend(m)
            continue
        recent = {x for e in order[-w:] for x in e}
        free_first = [e for e in m if e[0] not in recent and e[1] not in recent]
        if len(free_first) < min(w, len(m)):
            raise AssertionError("too few unblocked edges to continue the ordering")
        head = free_first[:w]
        chosen = set(head)
        order.extend(head)
        order.extend(e for e in m if e not in chosen)
    return order


def windows_are_matchings(order: Sequence[tuple[int, int]], w: int) -> bool:
    """Check every window of ``w`` consecutive edges exhaustively."""
    if w <= 1:
        return True
    for s in range(max(0, len(order) - w) + 1):
        win = order[s : s + w]
        verts = [x for e in win for x in e]
        if len(verts) != len(set(verts)):
            return False
    return True


def euler_orientation(g: Graph) -> list[tuple[int, int]]:
    """Orient each component along an Euler circuit; odd-degree graphs fall back to ``u -> v`` with ``u < v``."""
    if any(g.degree(v) % 2 for v in range(g.n)):
        return sorted(g.edges)
    h = nx.Graph()
    h.add_edges_from(sorted(g.edges))
    arcs = []
    for comp in sorted(nx.connected_components(h), key=min):
        arcs.extend(nx.eulerian_circuit(h.subgraph(comp), source=min(comp)))
    return arcs


def group_atoms(
    leftovers: Mapping[str, Graph], p: FPartition, cap: int | None = None
) -> list[list[Atom]]:
    """Split the class leftovers into small oriented matchings, each a union of atoms.

    Each ``leftovers[X]`` must be regular on ``X``. Edges are taken from the
    front of per-class stacks ordered by :func:`matching_sequence`; a matching
    is closed once it reaches ``cap`` edges, when no atom is available, or when
    the next atom would touch a vertex it already uses.
    """
    cap = cap if cap is not None else max(9, -(-p.n // 8))
    stacks: dict[str, list[tuple[int, int]]] = {}
    for lab in p.classes:
        g = leftovers.get(lab, Graph(p.n, frozenset()))
        if not g.edges:
            stacks[lab] = []
            continue
        orient = dict()
        for x, y in euler_orientation(g):
            orient[norm_edge(x, y)] = (x, y)
        order = matching_sequence(g, p.classes[lab])
        stacks[lab] = [orient[e] for e in order]
    ptr = dict.fromkeys(stacks, 0)
    out: list[list[Atom]] = []

    def available(shape) -> bool:
        return all(ptr[lab] < len(stacks[lab]) for lab in d_cycle(shape))

    while any(available(s) for s in SHAPES):
        current: list[Atom] = []
        used: set[int] = set()
        size = 0
        while size < cap:
            shape = next((s for s in SHAPES if available(s)), None)
            if shape is None:
                break
            labs = d_cycle(shape)
            edges = tuple(stacks[lab][ptr[lab]] for lab in labs)
            touched = {x for e in edges for x in e}
            if touched & used:
                break
            for lab in labs:
                ptr[lab] += 1
            used |= touched
            current.append(Atom(shape, edges))
            size += len(edges)
        out.append(current)
    left = [lab for lab in stacks if ptr[lab] < len(stacks[lab])]
    if left:
        raise ValueError(f"leftover edges in {left} cannot be grouped into atoms")
    return out
