"""Atoms: the smallest internally balanced matchings inside the classes of an F-partition."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..gadget import FPartition, class_label, pair_label
from ..graph_core import Graph
from ..partitions import PARTS

# atom shapes in the order they are tried
SHAPES: tuple[frozenset[int], ...] = tuple(
    frozenset(s) for s in ((3,), (4,), (5,), (3, 4), (3, 5), (4, 5))
)


def d_cycle(shape: Iterable[int]) -> tuple[str, ...]:
    """Class labels of the oriented cycle ``D_l`` of the reduced graph, ``l = sum(shape)``."""
    s = sorted(shape)
    if len(s) == 1:
        a = s[0]
        return (pair_label(a, a),) + tuple(class_label(a, i) for i in range(2, a + 1))
    a, b = s
    return (
        (pair_label(b, a),)
        + tuple(class_label(a, i) for i in range(2, a + 1))
        + (pair_label(a, b),)
        + tuple(class_label(b, i) for i in range(2, b + 1))
    )


SHAPE_OF_LENGTH = {sum(s): s for s in SHAPES}


@dataclass(frozen=True)
class Atom:
    """One edge inside each class of ``D_l``; ``edges[k]`` lies in ``d_cycle(kind)[k]``.

    Edges are ``(tail, head)`` pairs when the atom is oriented.
    """

    kind: frozenset[int]
    edges: tuple[tuple[int, int], ...]

    @property
    def size(self) -> int:
        return len(self.edges)

    @property
    def classes(self) -> tuple[str, ...]:
        return d_cycle(self.kind)


def _edges_by_class(h, p: FPartition) -> dict[str, list[tuple[int, int]]]:
    edges = sorted(h.edges) if isinstance(h, Graph) else list(h)
    out: dict[str, list[tuple[int, int]]] = {lab: [] for lab in p.classes}
    for u, v in edges:
        cu, cv = p.class_of[u], p.class_of[v]
        if cu != cv:
            raise ValueError(f"edge {(u, v)} crosses from {cu} to {cv}")
        out[cu].append((u, v))
    return out


def class_edge_counts(h, p: FPartition) -> dict[str, int]:
    return {lab: len(es) for lab, es in _edges_by_class(h, p).items()}


def balance_violation(h, p: FPartition) -> str | None:
    """The first violated balance equation as text, or ``None``."""
    e = class_edge_counts(h, p)
    for a in PARTS:
        first = sum(e[pair_label(a, b)] for b in PARTS)
        for i in range(2, a + 1):
            if e[class_label(a, i)] != first:
                return f"e(X{a}_1) = {first} != e({class_label(a, i)}) = {e[class_label(a, i)]}"
    for a in PARTS:
        for b in PARTS:
            if a < b and e[pair_label(a, b)] != e[pair_label(b, a)]:
                return f"e({pair_label(a, b)}) = {e[pair_label(a, b)]} != e({pair_label(b, a)}) = {e[pair_label(b, a)]}"
    return None


def is_internally_balanced(h, p: FPartition) -> bool:
    return balance_violation(h, p) is None


def decompose_into_atoms(h, p: FPartition) -> list[Atom]:
    """Peel atoms off ``h`` until nothing is left.

    ``h`` is a :class:`Graph` or a sequence of (possibly oriented) edge pairs.
    """
    bad = balance_violation(h, p)
    if bad is not None:
        raise ValueError(f"not internally balanced: {bad}")
    queues = {lab: deque(es) for lab, es in _edges_by_class(h, p).items()}
    atoms = []
    progress = True
    while progress:
        progress = False
        for shape in SHAPES:
            labs = d_cycle(shape)
            while all(queues[lab] for lab in labs):
                atoms.append(Atom(shape, tuple(queues[lab].popleft() for lab in labs)))
                progress = True
    left = [lab for lab, q in queues.items() if q]
    if left:
        raise AssertionError(f"edges left in {left} after peeling atoms")
    return atoms


def atoms_union(atoms: Sequence[Atom]) -> list[tuple[int, int]]:
    return [e for o in atoms for e in o.edges]
