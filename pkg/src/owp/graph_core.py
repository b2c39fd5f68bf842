"""Graphs, cycle factors, the decomposition verifier and the structural predicates.

Vertices are dense 0-based integers. Undirected edges are ``(u, v)`` tuples
with ``u < v``; edge sets over a fixed order ``n`` are also available as
boolean masks over the pair index so that disjointness and coverage checks are
single vectorised operations.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

Edge = tuple[int, int]


class MalformedFactorError(ValueError):
    """Raised when a cycle list is not a spanning 2-regular graph."""


def norm_edge(u: int, v: int) -> Edge:
    if u == v:
        raise ValueError(f"loop at vertex {u}")
    return (u, v) if u < v else (v, u)


def pair_index(u: int, v: int, n: int) -> int:
    """Index of the unordered pair {u, v} in the row-major upper triangle of K_n."""
    if u > v:
        u, v = v, u
    return u * n - u * (u + 1) // 2 + (v - u - 1)


def edge_mask(edges: Iterable[Edge], n: int) -> np.ndarray:
    mask = np.zeros(n * (n - 1) // 2, dtype=bool)
    for u, v in edges:
        mask[pair_index(u, v, n)] = True
    return mask


def mask_edges(mask: np.ndarray, n: int) -> list[Edge]:
    iu = np.triu_indices(n, k=1)
    idx = np.flatnonzero(mask)
    return [(int(iu[0][k]), int(iu[1][k])) for k in idx]


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``."""

    n: int
    edges: frozenset[Edge]

    def __post_init__(self):
        edges = frozenset(norm_edge(u, v) for u, v in self.edges)
        for u, v in edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge {(u, v)} outside vertex range 0..{self.n - 1}")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def trusted(cls, n: int, edges: frozenset[Edge]) -> "Graph":
        """Skip validation for edges already normalised and in range."""
        g = object.__new__(cls)
        object.__setattr__(g, "n", n)
        object.__setattr__(g, "edges", edges)
        return g

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        return cls(n, frozenset(norm_edge(int(u), int(v)) for u, v in edges))

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        nbrs: dict[int, set[int]] = defaultdict(set)
        for u, v in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return {v: frozenset(nbrs.get(v, ())) for v in range(self.n)}

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges:
            a[u, v] = a[v, u] = True
        return a

    def mask(self) -> np.ndarray:
        return edge_mask(self.edges, self.n)

    def minus(self, other: "Graph | Iterable[Edge]") -> "Graph":
        drop = other.edges if isinstance(other, Graph) else {norm_edge(*e) for e in other}
        return Graph(self.n, self.edges - drop)

    def union(self, other: "Graph | Iterable[Edge]") -> "Graph":
        add = other.edges if isinstance(other, Graph) else {norm_edge(*e) for e in other}
        return Graph(self.n, self.edges | add)

    def relabel(self, perm: Sequence[int]) -> "Graph":
        return Graph(self.n, frozenset(norm_edge(perm[u], perm[v]) for u, v in self.edges))

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class HostGraph(Graph):
    """Host of a decomposition: ``complete``, ``complete-minus-pm`` or ``custom``."""

    kind: str = "custom"

    def __post_init__(self):
        super().__post_init__()
        if self.kind == "complete":
            if len(self.edges) != self.n * (self.n - 1) // 2:
                raise ValueError("complete host must contain every pair")
        elif self.kind == "complete-minus-pm":
            if self.n % 2:
                raise ValueError("complete-minus-pm host needs even order")
            if any(d != self.n - 2 for d in self.degrees()):
                raise ValueError("complete-minus-pm host must be (n-2)-regular")
        elif self.kind != "custom":
            raise ValueError(f"unknown host kind {self.kind!r}")

    @classmethod
    def complete(cls, n: int) -> "HostGraph":
        return cls(n, frozenset(itertools.combinations(range(n), 2)), "complete")

    @classmethod
    def complete_minus_pm(cls, n: int) -> "HostGraph":
        """K_n minus the perfect matching {01, 23, 45, ...}."""
        if n % 2:
            raise ValueError("complete-minus-pm host needs even order")
        pm = {(i, i + 1) for i in range(0, n, 2)}
        edges = frozenset(e for e in itertools.combinations(range(n), 2) if e not in pm)
        return cls(n, edges, "complete-minus-pm")

    @classmethod
    def custom(cls, n: int, edges: Iterable[Sequence[int]]) -> "HostGraph":
        return cls(n, frozenset(norm_edge(int(u), int(v)) for u, v in edges), "custom")


# ---------------------------------------------------------------------------
# cycle factors


@dataclass(frozen=True, order=True)
class CycleType:
    """Sorted multiset of cycle lengths; the isomorphism invariant of 2-regular graphs."""

    lengths: tuple[int, ...]

    def __post_init__(self):
        lengths = tuple(sorted(int(x) for x in self.lengths))
        if not lengths:
            raise ValueError("cycle type needs at least one cycle")
        if any(x < 3 for x in lengths):
            raise ValueError(f"cycle lengths must be >= 3, got {lengths}")
        object.__setattr__(self, "lengths", lengths)

    @property
    def order(self) -> int:
        return sum(self.lengths)

    @classmethod
    def parse(cls, text: str) -> "CycleType":
        return cls(tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok))

    def __str__(self) -> str:
        return ",".join(map(str, self.lengths))


@dataclass(frozen=True)
class CycleFactor:
    """Spanning 2-regular graph given as vertex-disjoint cyclic vertex sequences."""

    n: int
    cycles: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        cycles = tuple(tuple(int(v) for v in c) for c in self.cycles)
        seen: set[int] = set()
        for c in cycles:
            if len(c) < 3:
                raise MalformedFactorError(f"cycle {c} has length {len(c)} < 3")
            for v in c:
                if not 0 <= v < self.n:
                    raise MalformedFactorError(f"vertex {v} outside 0..{self.n - 1}")
                if v in seen:
                    raise MalformedFactorError(f"vertex {v} repeated")
                seen.add(v)
        if len(seen) != self.n:
            missing = min(set(range(self.n)) - seen)
            raise MalformedFactorError(f"vertex {missing} not covered")
        object.__setattr__(self, "cycles", cycles)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> "CycleFactor":
        """Recover the cycles of a spanning 2-regular edge set."""
        nbrs: dict[int, list[int]] = defaultdict(list)
        for u, v in edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        for v in range(n):
            if len(nbrs[v]) != 2:
                raise MalformedFactorError(f"vertex {v} has degree {len(nbrs[v])}, expected 2")
        seen: set[int] = set()
        cycles = []
        for start in range(n):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            prev, cur = start, min(nbrs[start])
            while cur != start:
                cyc.append(cur)
                seen.add(cur)
                a, b = nbrs[cur]
                prev, cur = cur, (b if a == prev else a)
            cycles.append(tuple(cyc))
        return cls(n, tuple(cycles))

    @cached_property
    def edges(self) -> frozenset[Edge]:
        return frozenset(
            norm_edge(c[i], c[(i + 1) % len(c)]) for c in self.cycles for i in range(len(c))
        )

    def edge_list(self) -> list[Edge]:
        return [norm_edge(c[i], c[(i + 1) % len(c)]) for c in self.cycles for i in range(len(c))]

    def graph(self) -> Graph:
        return Graph(self.n, self.edges)

    def mask(self) -> np.ndarray:
        return edge_mask(self.edges, self.n)

    def relabel(self, perm: Sequence[int]) -> "CycleFactor":
        return CycleFactor(self.n, tuple(tuple(perm[v] for v in c) for c in self.cycles))

    def cycle_type(self) -> CycleType:
        return CycleType(tuple(len(c) for c in self.cycles))

    def __str__(self) -> str:
        return "".join("(" + " ".join(map(str, c)) + ")" for c in self.cycles)


def cycle_type_of(f: CycleFactor | Sequence[Sequence[int]], n: int | None = None) -> CycleType:
    """Cycle type of a factor; raw cycle lists are validated first."""
    if not isinstance(f, CycleFactor):
        cycles = tuple(tuple(c) for c in f)
        f = CycleFactor(n if n is not None else sum(map(len, cycles)), cycles)
    return f.cycle_type()


@dataclass(frozen=True)
class FactorSpec:
    """Required cycle types with multiplicities, e.g. ``{3,4}x2 ; {7}x1``."""

    entries: tuple[tuple[CycleType, int], ...]

    def __post_init__(self):
        merged: Counter[CycleType] = Counter()
        for ctype, m in self.entries:
            if m < 1:
                raise ValueError("multiplicities must be >= 1")
            merged[ctype] += m
        orders = {ct.order for ct in merged}
        if len(orders) > 1:
            raise ValueError(f"cycle types of different orders: {sorted(orders)}")
        object.__setattr__(self, "entries", tuple(sorted(merged.items())))

    @classmethod
    def parse(cls, text: str) -> "FactorSpec":
        entries = []
        for chunk in text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            ctype, _, mult = chunk.partition("x")
            entries.append((CycleType.parse(ctype), int(mult) if mult else 1))
        if not entries:
            raise ValueError("empty factor spec")
        return cls(tuple(entries))

    @classmethod
    def single(cls, ctype: CycleType | Sequence[int], m: int) -> "FactorSpec":
        if not isinstance(ctype, CycleType):
            ctype = CycleType(tuple(ctype))
        return cls(((ctype, m),))

    @property
    def order(self) -> int:
        return self.entries[0][0].order

    @property
    def total(self) -> int:
        return sum(m for _, m in self.entries)

    def counter(self) -> Counter:
        return Counter(dict(self.entries))

    def __str__(self) -> str:
        return ";".join(f"{ct}x{m}" for ct, m in self.entries)


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    reason: str = ""
    witness: tuple = ()

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return f"invalid: {self.reason}" + (f" witness={self.witness}" if self.witness else "")


def verify_decomposition(
    host: Graph,
    factors: Sequence[CycleFactor | Sequence[Sequence[int]]],
    spec: FactorSpec,
) -> VerificationReport:
    """Accept iff ``factors`` are spanning 2-regular, pairwise edge-disjoint,
    cover ``host`` exactly and realise ``spec`` with its multiplicities.

    The report names the first violation found, in that order of checks.
    """
    n = host.n
    host_mask = host.mask()
    covered = np.zeros_like(host_mask)
    owner = np.full(host_mask.shape, -1, dtype=np.int64)
    types: Counter[CycleType] = Counter()
    for k, f in enumerate(factors):
        try:
            if not isinstance(f, CycleFactor):
                f = CycleFactor(n, tuple(tuple(c) for c in f))
            elif f.n != n:
                raise MalformedFactorError(f"factor has order {f.n}, host has {n}")
        except MalformedFactorError as exc:
            return VerificationReport(False, f"factor {k} malformed: {exc}", (k,))
        fm = f.mask()
        outside = fm & ~host_mask
        if outside.any():
            e = mask_edges(outside, n)[0]
            return VerificationReport(False, f"factor {k} uses non-host edge {e}", (k, e))
        clash = fm & covered
        if clash.any():
            idx = int(np.flatnonzero(clash)[0])
            e = mask_edges(clash, n)[0]
            return VerificationReport(
                False, f"edge {e} shared by factors {int(owner[idx])} and {k}", (int(owner[idx]), k, e)
            )
        covered |= fm
        owner[fm] = k
        types[f.cycle_type()] += 1
    missing = host_mask & ~covered
    if missing.any():
        e = mask_edges(missing, n)[0]
        return VerificationReport(False, f"host edge {e} not covered", (e,))
    want = spec.counter()
    if types != want:
        diff = {str(t): (types.get(t, 0), want.get(t, 0)) for t in set(types) | set(want) if types.get(t, 0) != want.get(t, 0)}
        return VerificationReport(False, f"cycle types do not match spec (got, want): {diff}", tuple(sorted(diff.items())))
    return VerificationReport(True)


# ---------------------------------------------------------------------------
# orientation and balance


@dataclass(frozen=True)
class OrientedPartitionedGraph:
    """Edge set with a class map and an oriented reduced graph on the class labels.

    Every edge must join two classes forming an arc of ``arcs`` (in either
    direction); the edge is oriented like that arc.
    """

    graph: Graph
    class_of: Mapping[int, Hashable]
    arcs: frozenset[tuple[Hashable, Hashable]]

    def oriented_edges(self) -> list[tuple[int, int]]:
        out = []
        for u, v in sorted(self.graph.edges):
            cu, cv = self.class_of[u], self.class_of[v]
            if (cu, cv) in self.arcs:
                out.append((u, v))
            elif (cv, cu) in self.arcs:
                out.append((v, u))
            else:
                raise ValueError(f"edge {(u, v)} joins classes {cu!r},{cv!r} not adjacent in the reduced graph")
        return out


@dataclass(frozen=True)
class BalanceProfile:
    r: int | None
    outdeg: dict[int, int]
    indeg: dict[int, int]
    witness: int | None = None

    @property
    def balanced(self) -> bool:
        return self.r is not None


def balance_profile(g: OrientedPartitionedGraph, vertices: Iterable[int] | None = None) -> BalanceProfile:
    """Per-vertex out/in degrees of the induced orientation; ``r`` if it is r-regular.

    ``vertices`` defaults to every vertex carrying a class label.
    """
    verts = sorted(g.class_of) if vertices is None else sorted(vertices)
    out = {v: 0 for v in verts}
    inn = {v: 0 for v in verts}
    for u, v in g.oriented_edges():
        out[u] = out.get(u, 0) + 1
        inn[v] = inn.get(v, 0) + 1
    if not verts:
        return BalanceProfile(0, out, inn)
    r = out[verts[0]]
    for v in verts:
        if out[v] != r or inn[v] != r:
            return BalanceProfile(None, out, inn, v)
    return BalanceProfile(r, out, inn)


# ---------------------------------------------------------------------------
# typicality, quasirandomness, divisibility


def _class_index(n: int, classes: Sequence[Sequence[int]]) -> np.ndarray:
    tau = np.full(n, -1, dtype=np.int64)
    for i, cls in enumerate(classes):
        for v in cls:
            if tau[v] != -1:
                raise ValueError(f"vertex {v} in two classes")
            tau[v] = i
    if (tau < 0).any():
        raise ValueError(f"vertex {int(np.flatnonzero(tau < 0)[0])} in no class")
    return tau


@dataclass(frozen=True)
class TypicalityReport:
    ok: bool
    worst_set: tuple[int, ...] = ()
    worst_class: int = -1
    observed: int = 0
    expected: float = 0.0
    deviation: float = 0.0

    def __bool__(self) -> bool:
        return self.ok


def is_typical(
    g: Graph,
    classes: Sequence[Sequence[int]],
    eps: float,
    s: int,
    density: np.ndarray | float,
) -> TypicalityReport:
    """Check every common neighbourhood of at most ``s`` vertices against the density matrix.

    ``deviation`` of the witness is ``|observed - expected| / expected`` (``inf``
    when the expectation is zero but the count is not).
    """
    if not 0 <= s <= 3:
        raise ValueError("typicality is only checked for s <= 3")
    n, t = g.n, len(classes)
    tau = _class_index(n, classes)
    D = np.full((t, t), float(density)) if np.isscalar(density) else np.asarray(density, dtype=float)
    if D.shape != (t, t) or not np.allclose(D, D.T):
        raise ValueError("density matrix must be symmetric t x t")
    A = g.adjacency_matrix().astype(np.int64)
    C = np.zeros((n, t), dtype=np.int64)
    C[np.arange(n), tau] = 1
    sizes = C.sum(axis=0).astype(float)

    worst = TypicalityReport(True)
    worst_dev = -1.0

    def consider(S: tuple[int, ...], counts: np.ndarray, expect: np.ndarray):
        nonlocal worst, worst_dev
        with np.errstate(divide="ignore", invalid="ignore"):
            dev = np.where(expect > 0, np.abs(counts - expect) / np.where(expect > 0, expect, 1), np.where(counts > 0, np.inf, 0.0))
        i = int(np.argmax(dev))
        if dev[i] > worst_dev:
            worst_dev = float(dev[i])
            worst = TypicalityReport(bool(dev[i] <= eps), S, i, int(counts[i]), float(expect[i]), float(dev[i]))

    consider((), sizes, sizes)
    if s >= 1:
        cnt1 = A @ C  # n x t
        exp1 = sizes[None, :] * D[tau, :]
        dev = _dev(cnt1, exp1)
        v, i = np.unravel_index(int(np.argmax(dev)), dev.shape)
        consider((int(v),), cnt1[v].astype(float), exp1[v])
    if s >= 2:
        for u in range(n):
            rows = (A[u][None, :] * A[u + 1 :]) @ C  # common nbrs of (u, w) for w > u
            if rows.size == 0:
                continue
            exp2 = sizes[None, :] * D[tau[u], :][None, :] * D[tau[u + 1 :], :]
            dev = _dev(rows, exp2)
            k, i = np.unravel_index(int(np.argmax(dev)), dev.shape)
            consider((u, u + 1 + int(k)), rows[k].astype(float), exp2[k])
    if s >= 3:
        for u, w in itertools.combinations(range(n), 2):
            base = A[u] * A[w]
            rows = (base[None, :] * A[w + 1 :]) @ C
            if rows.size == 0:
                continue
            exp3 = sizes[None, :] * (D[tau[u], :] * D[tau[w], :])[None, :] * D[tau[w + 1 :], :]
            dev = _dev(rows, exp3)
            k, i = np.unravel_index(int(np.argmax(dev)), dev.shape)
            consider((u, w, w + 1 + int(k)), rows[k].astype(float), exp3[k])
    return worst


def _dev(counts: np.ndarray, expect: np.ndarray) -> np.ndarray:
    counts = counts.astype(float)
    safe = np.where(expect > 0, expect, 1.0)
    return np.where(expect > 0, np.abs(counts - expect) / safe, np.where(counts > 0, np.inf, 0.0))


def is_quasirandom(
    g: Graph,
    eps: float,
    d: float,
    parts: tuple[Sequence[int], Sequence[int]] | None = None,
) -> bool:
    """``(eps, d)``-quasirandomness of a graph, or of the bipartite pair ``parts``.

    Whole graph: every degree is ``(d +- eps) n`` and every codegree ``(d^2 +- eps) n``.
    Pair ``(V1, V2)``: the same bounds measured into the opposite side.
    """
    A = g.adjacency_matrix().astype(np.int64)
    if parts is None:
        sides = [(np.arange(g.n), np.arange(g.n))]
    else:
        v1, v2 = (np.asarray(sorted(p), dtype=np.int64) for p in parts)
        sides = [(v1, v2), (v2, v1)]
    for src, dst in sides:
        m = len(dst)
        if m == 0 or len(src) == 0:
            return False
        sub = A[np.ix_(src, dst)]
        deg = sub.sum(axis=1)
        if np.any(np.abs(deg - d * m) > eps * m + 1e-9):
            return False
        co = sub @ sub.T
        iu = np.triu_indices(len(src), k=1)
        if len(iu[0]) and np.any(np.abs(co[iu] - d * d * m) > eps * m + 1e-9):
            return False
    return True


@dataclass(frozen=True)
class DivisibilityReport:
    ok: bool
    m: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def is_divisible(
    g: Graph,
    classes: Sequence[Sequence[int]],
    h: Graph,
    sigma: Sequence[int],
) -> DivisibilityReport:
    """(H, sigma)-divisibility: a common edge-count multiplier and per-vertex degree combinations.

    ``sigma[x]`` is the class index of vertex ``x`` of ``h``. Degree condition
    coefficients are enumerated up to ``max_j d_G(v, V_j)`` each.
    """
    t = len(classes)
    tau = _class_index(g.n, classes)
    sigma = [int(c) for c in sigma]
    if len(sigma) != h.n or any(not 0 <= c < t for c in sigma):
        raise ValueError("sigma must map every vertex of h to a class index")

    eg = np.zeros((t, t), dtype=np.int64)
    for u, v in g.edges:
        eg[tau[u], tau[v]] += 1
        eg[tau[v], tau[u]] += 1
    eh = np.zeros((t, t), dtype=np.int64)
    for x, y in h.edges:
        eh[sigma[x], sigma[y]] += 1
        eh[sigma[y], sigma[x]] += 1

    if not eh.any():
        if eg.any():
            return DivisibilityReport(False, None, "h has no edges but g does")
        m = 0
    else:
        i, j = np.argwhere(eh > 0)[0]
        if eg[i, j] % eh[i, j]:
            return DivisibilityReport(False, None, f"e_G(V{i},V{j}) not a multiple of e_H(P{i},P{j})")
        m = int(eg[i, j] // eh[i, j])
        bad = np.argwhere(eg != m * eh)
        if len(bad):
            i, j = bad[0]
            return DivisibilityReport(False, None, f"edge counts of (V{i},V{j}) break the common multiplier {m}")

    # degree profiles of the pattern, per class
    hdeg = np.zeros((h.n, t), dtype=np.int64)
    for x, y in h.edges:
        hdeg[x, sigma[y]] += 1
        hdeg[y, sigma[x]] += 1
    gdeg = np.zeros((g.n, t), dtype=np.int64)
    for u, v in g.edges:
        gdeg[u, tau[v]] += 1
        gdeg[v, tau[u]] += 1

    cache: dict[tuple[int, tuple[int, ...]], bool] = {}
    for v in range(g.n):
        i = int(tau[v])
        key = (i, tuple(int(x) for x in gdeg[v]))
        if key not in cache:
            pats = [tuple(int(x) for x in hdeg[x]) for x in range(h.n) if sigma[x] == i]
            pats = sorted({p for p in pats if any(p)}, reverse=True)
            cache[key] = _nonneg_combination(key[1], pats)
        if not cache[key]:
            return DivisibilityReport(False, m, f"degree vector of vertex {v} is not a nonnegative combination")
    return DivisibilityReport(True, m)


def _nonneg_combination(target: tuple[int, ...], pats: list[tuple[int, ...]]) -> bool:
    """Is ``target`` a nonnegative integer combination of the vectors ``pats``?"""
    if not any(target):
        return True
    if not pats:
        return False
    bound = max(target)
    seen: set[tuple[int, tuple[int, ...]]] = set()

    def rec(k: int, rest: tuple[int, ...]) -> bool:
        if not any(rest):
            return True
        if k == len(pats):
            return False
        if (k, rest) in seen:
            return False
        p = pats[k]
        cur = rest
        for _ in range(bound + 1):
            if rec(k + 1, cur):
                return True
            nxt = tuple(a - b for a, b in zip(cur, p))
            if min(nxt) < 0:
                break
            cur = nxt
        seen.add((k, rest))
        return False

    return rec(0, tuple(target))
