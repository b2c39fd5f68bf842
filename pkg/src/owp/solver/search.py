"""Exact searches built on the backtracking kernel.

``solve_factorization`` decides whether a host decomposes into cycle factors
of prescribed types; the partite and wheel searches reuse the same kernel with
positional class masks and per-hub vertex sets.
"""

from __future__ import annotations

import enum
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Hashable, Mapping, Sequence

import numpy as np

from ..graph_core import (
    CycleFactor,
    CycleType,
    FactorSpec,
    Graph,
    HostGraph,
    norm_edge,
    verify_decomposition,
)
from . import kernel

CHUNK = 200_000


class Verdict(enum.Enum):
    FOUND = "Found"
    EXHAUSTED = "Exhausted"
    TIMEOUT = "Timeout"

    def __str__(self) -> str:
        return self.value


class InfeasibleSpecError(ValueError):
    """The instance fails a counting condition checked before any search."""


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("OWP_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SearchConfig:
    timeout: float = 600.0
    threads: int = field(default_factory=default_threads)
    seed: int = 0
    symmetry_breaking: bool = True
    first_factor_canonical: bool = True

    def __post_init__(self):
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass
class SearchOutcome:
    verdict: Verdict
    certificate: Any = None
    nodes: int = 0
    wall_time: float = 0.0

    @property
    def found(self) -> bool:
        return self.verdict is Verdict.FOUND

    def __str__(self) -> str:
        return f"{self.verdict} nodes={self.nodes} wall={self.wall_time:.3f}s"


# ---------------------------------------------------------------------------
# kernel driver


@dataclass
class _Problem:
    """Kernel inputs over compact vertex labels ``0..n-1``."""

    adj: np.ndarray
    lens: np.ndarray
    smasks: np.ndarray
    mult: np.ndarray
    seq: np.ndarray
    pos_mask: np.ndarray
    anchor: bool
    dir_canon: bool
    forward: bool = True


def _adjacency_masks(n: int, edges) -> np.ndarray:
    adj = np.zeros(n, dtype=np.int64)
    for u, v in edges:
        adj[u] |= np.int64(1) << v
        adj[v] |= np.int64(1) << u
    return adj


def _length_table(ctype: CycleType) -> np.ndarray:
    row = np.zeros(kernel.MAX_LEN + 1, dtype=np.int64)
    for L in ctype.lengths:
        row[L] += 1
    return row


def _run_worker(prob: _Problem, deadline: float, stop: threading.Event, split_depth: int, n_workers: int, worker: int):
    adj = prob.adj.copy()
    frames, lenrem, scal, mult = kernel.new_state(len(adj), len(prob.seq), prob.mult)
    status = kernel.BUDGET
    while status == kernel.BUDGET:
        if stop.is_set() or time.monotonic() > deadline:
            return kernel.BUDGET, None, int(scal[kernel.S_NODES])
        status = kernel.run(
            adj, prob.lens, prob.smasks, mult, prob.seq, prob.pos_mask,
            prob.anchor, prob.dir_canon, prob.forward,
            frames, lenrem, scal, CHUNK, split_depth, n_workers, worker,
        )
    nodes = int(scal[kernel.S_NODES])
    if status == kernel.FOUND:
        return status, kernel.decode(frames, int(scal[kernel.S_DEPTH])), nodes
    return status, None, nodes


def _drive(prob: _Problem, cfg: SearchConfig) -> tuple[Verdict, list | None, int, float]:
    t0 = time.monotonic()
    deadline = t0 + cfg.timeout
    stop = threading.Event()
    if len(prob.seq) == 0:
        return Verdict.FOUND, [], 0, 0.0
    workers = cfg.threads
    if workers == 1:
        status, sol, nodes = _run_worker(prob, deadline, stop, -1, 1, 0)
        results = [(status, sol, nodes)]
    else:
        # round-robin split of the branches opened at a fixed shallow depth
        split_depth = 4
        lock = threading.Lock()
        winner: list = []

        def job(w):
            res = _run_worker(prob, deadline, stop, split_depth, workers, w)
            if res[0] == kernel.FOUND:
                with lock:
                    if not winner:
                        winner.append(res[1])
                stop.set()
            return res

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(workers)))
        if winner:
            results = [(kernel.FOUND, winner[0], sum(r[2] for r in results))]
    nodes = sum(r[2] for r in results)
    wall = time.monotonic() - t0
    statuses = [r[0] for r in results]
    if kernel.FOUND in statuses:
        return Verdict.FOUND, next(r[1] for r in results if r[0] == kernel.FOUND), nodes, wall
    if all(s == kernel.EXHAUSTED for s in statuses):
        return Verdict.EXHAUSTED, None, nodes, wall
    return Verdict.TIMEOUT, None, nodes, wall


# ---------------------------------------------------------------------------
# factorizations of a host


def canonical_factor(ctype: CycleType) -> CycleFactor:
    """Cycles on consecutive labels, shortest first: ``(0 1 2)(3 4 5 6)``."""
    cycles, start = [], 0
    for L in ctype.lengths:
        cycles.append(tuple(range(start, start + L)))
        start += L
    return CycleFactor(ctype.order, tuple(cycles))


def check_feasible(host: Graph, spec: FactorSpec) -> None:
    n = host.n
    if spec.order != n:
        raise InfeasibleSpecError(f"cycle types have order {spec.order}, host has {n} vertices")
    if spec.total * n != len(host.edges):
        raise InfeasibleSpecError(
            f"{spec.total} factors of {n} edges cannot cover {len(host.edges)} host edges"
        )
    if n > kernel.MAX_ORDER:
        raise InfeasibleSpecError(f"exact search supports at most {kernel.MAX_ORDER} vertices")


def solve_factorization(host: HostGraph | Graph, spec: FactorSpec, cfg: SearchConfig | None = None) -> SearchOutcome:
    """Exact search for a decomposition of ``host`` into factors realising ``spec``.

    With ``first_factor_canonical`` on a complete host, one factor of the least
    cycle type is fixed to :func:`canonical_factor` (every such factor lies in
    one orbit of the symmetric group). With ``symmetry_breaking`` on, every
    further factor must contain the least remaining edge at vertex 0, which
    orders the factors of any decomposition uniquely.
    """
    cfg = cfg or SearchConfig()
    check_feasible(host, spec)
    n = host.n
    kind = getattr(host, "kind", "custom")
    t0 = time.monotonic()
    if any(d != 2 * spec.total for d in host.degrees()):
        return SearchOutcome(Verdict.EXHAUSTED, None, 0, time.monotonic() - t0)

    perm = list(range(n))
    if cfg.seed and kind != "complete":
        perm = [int(x) for x in np.random.default_rng(cfg.seed).permutation(n)]
    inv = [0] * n
    for v, pv in enumerate(perm):
        inv[pv] = v
    edges = {norm_edge(perm[u], perm[v]) for u, v in host.edges}

    types = [ct for ct, _ in spec.entries]
    mult = [m for _, m in spec.entries]
    fixed: list[CycleFactor] = []
    if cfg.first_factor_canonical and kind == "complete":
        first = canonical_factor(types[0])
        fixed.append(first)
        edges -= first.edges
        mult[0] -= 1

    K = sum(mult)
    prob = _Problem(
        adj=_adjacency_masks(n, edges),
        lens=np.array([_length_table(ct) for ct in types], dtype=np.int64),
        smasks=np.full(len(types), (1 << n) - 1, dtype=np.int64),
        mult=np.array(mult, dtype=np.int64),
        seq=(np.full(K, -1, dtype=np.int64) if cfg.symmetry_breaking
             else np.array([t for t, m in enumerate(mult) for _ in range(m)], dtype=np.int64)),
        pos_mask=np.array([(1 << n) - 1], dtype=np.int64),
        anchor=cfg.symmetry_breaking,
        dir_canon=cfg.symmetry_breaking,
    )
    verdict, sol, nodes, _ = _drive(prob, cfg)
    wall = time.monotonic() - t0
    if verdict is not Verdict.FOUND:
        return SearchOutcome(verdict, None, nodes, wall)
    factors = fixed + [CycleFactor(n, tuple(tuple(c) for c in cycles)) for _, cycles in sol]
    factors = [f.relabel(inv) for f in factors]
    report = verify_decomposition(host, factors, spec)
    if not report:
        raise AssertionError(f"search produced an invalid certificate: {report}")
    return SearchOutcome(Verdict.FOUND, factors, nodes, wall)


# ---------------------------------------------------------------------------
# resolvable partite cycle decompositions


def class_regularity(g: Graph, classes: Sequence[Sequence[int]]) -> int:
    """Common degree ``r`` from every vertex of ``V_i`` into ``V_{i-1}`` and ``V_{i+1}``.

    Raises ``ValueError`` if ``g`` has an edge outside consecutive classes or
    the degrees differ.
    """
    ell = len(classes)
    tau = {}
    for i, cls in enumerate(classes):
        for v in cls:
            tau[v] = i
    for u, v in g.edges:
        if u not in tau or v not in tau:
            raise ValueError(f"edge {(u, v)} leaves the classes")
        if (tau[u] - tau[v]) % ell not in (1, ell - 1):
            raise ValueError(f"edge {(u, v)} joins non-consecutive classes")
    r = None
    for i, cls in enumerate(classes):
        nxt, prv = set(classes[(i + 1) % ell]), set(classes[(i - 1) % ell])
        for v in cls:
            nb = g.neighbors(v) if v < g.n else frozenset()
            for side in (nxt, prv):
                d = len(nb & side)
                if r is None:
                    r = d
                elif d != r:
                    raise ValueError(f"vertex {v} has {d} neighbours in a neighbouring class, expected {r}")
    return r or 0


def resolvable_partite_cycle_decomposition(
    g: Graph, classes: Sequence[Sequence[int]], cfg: SearchConfig | None = None
) -> SearchOutcome:
    """Split a class-regular blown cycle into ``r`` partite ``C_ell``-factors.

    A partite ``C_ell``-factor is a set of cycles ``(v_1 .. v_ell)`` with
    ``v_i`` in ``classes[i]`` covering every class vertex once. The
    certificate is a list of factors, each a list of such cycles.
    """
    cfg = cfg or SearchConfig()
    t0 = time.monotonic()
    ell = len(classes)
    if ell < 3:
        raise ValueError("need at least three classes")
    sizes = {len(c) for c in classes}
    if len(sizes) != 1:
        raise ValueError("classes must have equal sizes")
    c = sizes.pop()
    r = class_regularity(g, classes)
    if r == 0 or c == 0:
        return SearchOutcome(Verdict.FOUND, [], 0, time.monotonic() - t0)
    order = [v for cls in classes for v in sorted(cls)]
    if len(order) > kernel.MAX_ORDER:
        raise InfeasibleSpecError(f"exact search supports at most {kernel.MAX_ORDER} vertices")
    index = {v: i for i, v in enumerate(order)}
    edges = [(index[u], index[v]) for u, v in g.edges]
    pos = np.array([sum(1 << index[v] for v in cls) for cls in classes], dtype=np.int64)
    N = len(order)
    prob = _Problem(
        adj=_adjacency_masks(N, edges),
        lens=np.array([_length_table(CycleType((ell,) * c))], dtype=np.int64),
        smasks=np.array([(1 << N) - 1], dtype=np.int64),
        mult=np.array([r], dtype=np.int64),
        seq=np.full(r, -1, dtype=np.int64),
        pos_mask=pos,
        anchor=True,
        dir_canon=False,
    )
    verdict, sol, nodes, _ = _drive(prob, cfg)
    wall = time.monotonic() - t0
    if verdict is not Verdict.FOUND:
        return SearchOutcome(verdict, None, nodes, wall)
    factors = [[tuple(order[v] for v in cyc) for cyc in cycles] for _, cycles in sol]
    check_partite_factors(g, classes, factors)
    return SearchOutcome(Verdict.FOUND, factors, nodes, wall)


def check_partite_factors(g: Graph, classes: Sequence[Sequence[int]], factors) -> None:
    """Raise unless ``factors`` are perfect partite cycle factors partitioning ``E(g)``."""
    ell = len(classes)
    allv = sorted(v for cls in classes for v in cls)
    seen: set = set()
    for f in factors:
        verts = sorted(v for cyc in f for v in cyc)
        if verts != allv:
            raise AssertionError("partite factor does not cover the classes exactly")
        for cyc in f:
            if len(cyc) != ell or any(cyc[i] not in set(classes[i]) for i in range(ell)):
                raise AssertionError(f"cycle {cyc} does not follow the class order")
            for i in range(ell):
                e = norm_edge(cyc[i], cyc[(i + 1) % ell])
                if e in seen or e not in g.edges:
                    raise AssertionError(f"edge {e} reused or missing from g")
                seen.add(e)
    if seen != set(g.edges):
        raise AssertionError("partite factors do not cover g")


# ---------------------------------------------------------------------------
# wheels


def wheelify(g: Graph, classes: Sequence[Sequence[int]], r: int) -> tuple[Graph, list[list[int]]]:
    """Append a hub class of ``r`` new vertices joined to every vertex of ``g``."""
    hubs = list(range(g.n, g.n + r))
    edges = set(g.edges) | {(v, h) for h in hubs for v in range(g.n)}
    return Graph(g.n + r, frozenset(edges)), [list(c) for c in classes] + [hubs]


def extract_factors(wheels: Sequence[tuple[int, Sequence[int]]]) -> dict[int, list[tuple[int, ...]]]:
    """Group wheel rims by hub: removing the hub from each wheel leaves its cycles."""
    out: dict[int, list[tuple[int, ...]]] = {}
    for hub, rim in wheels:
        out.setdefault(hub, []).append(tuple(rim))
    return out


def wheel_decomposition(
    g: Graph, V: Sequence[int], U: Sequence[int], ell: int, cfg: SearchConfig | None = None
) -> SearchOutcome:
    """Decompose ``g`` into wheels with ``ell`` spokes and hubs in ``U``.

    The rims of the wheels at a hub ``u`` partition ``N(u)`` into ``ell``-cycles,
    so the search looks for one ``C_ell``-factor of ``N(u)`` per hub, edge-disjoint
    inside ``g[V]``. The certificate is a list of ``(hub, rim)`` pairs.
    """
    cfg = cfg or SearchConfig()
    t0 = time.monotonic()
    V, U = sorted(V), sorted(U)
    Vs, Us = set(V), set(U)
    for u, v in g.edges:
        if u in Us and v in Us:
            raise InfeasibleSpecError(f"hubs {u} and {v} are adjacent")
    for v in V:
        dv, du = len(g.neighbors(v) & Vs), len(g.neighbors(v) & Us)
        if dv != 2 * du:
            raise InfeasibleSpecError(f"vertex {v}: d(v,V)={dv} is not twice d(v,U)={du}")
    for u in U:
        if g.degree(u) % ell:
            raise InfeasibleSpecError(f"hub {u} has degree {g.degree(u)}, not divisible by {ell}")
    if len(V) > kernel.MAX_ORDER:
        raise InfeasibleSpecError(f"exact search supports at most {kernel.MAX_ORDER} rim vertices")
    index = {v: i for i, v in enumerate(V)}
    edges = [(index[a], index[b]) for a, b in g.edges if a in Vs and b in Vs]
    hubs = [u for u in U if g.degree(u)]
    groups: dict[frozenset, list[int]] = {}
    for u in hubs:
        groups.setdefault(g.neighbors(u), []).append(u)
    keys = list(groups)
    smasks = np.array([sum(1 << index[v] for v in key) for key in keys], dtype=np.int64)
    lens = np.array([_length_table(CycleType((ell,) * (len(key) // ell))) for key in keys], dtype=np.int64)
    mult = [len(groups[k]) for k in keys]
    single = len(keys) == 1
    prob = _Problem(
        adj=_adjacency_masks(len(V), edges),
        lens=lens,
        smasks=smasks,
        mult=np.array(mult, dtype=np.int64),
        seq=(np.full(sum(mult), -1, dtype=np.int64) if single
             else np.array([t for t, m in enumerate(mult) for _ in range(m)], dtype=np.int64)),
        pos_mask=np.array([(1 << len(V)) - 1], dtype=np.int64),
        anchor=single and cfg.symmetry_breaking,
        dir_canon=True,
    )
    verdict, sol, nodes, _ = _drive(prob, cfg)
    wall = time.monotonic() - t0
    if verdict is not Verdict.FOUND:
        return SearchOutcome(verdict, None, nodes, wall)
    queues = {t: list(groups[k]) for t, k in enumerate(keys)}
    wheels = []
    for t, cycles in sol:
        hub = queues[t].pop(0)
        wheels.extend((hub, tuple(V[v] for v in cyc)) for cyc in cycles)
    check_wheels(g, U, ell, wheels)
    return SearchOutcome(Verdict.FOUND, wheels, nodes, wall)


def check_wheels(g: Graph, U: Sequence[int], ell: int, wheels) -> None:
    seen: set = set()
    for hub, rim in wheels:
        if hub not in set(U) or len(rim) != ell:
            raise AssertionError(f"bad wheel at hub {hub}")
        es = [norm_edge(hub, v) for v in rim] + [norm_edge(rim[i], rim[(i + 1) % ell]) for i in range(ell)]
        for e in es:
            if e in seen or e not in g.edges:
                raise AssertionError(f"wheel edge {e} reused or missing")
            seen.add(e)
    if seen != set(g.edges):
        raise AssertionError("wheels do not cover g")


# ---------------------------------------------------------------------------
# embeddings with a prescribed partial map


def embed_with_prescription(
    h: Graph,
    g: Graph,
    sigma: Mapping[int, Hashable],
    classes: Mapping[Hashable, Sequence[int]],
    phi0: Mapping[int, int] | None = None,
    cfg: SearchConfig | None = None,
) -> SearchOutcome:
    """Injective homomorphism ``h -> g`` with ``phi(x)`` in ``classes[sigma[x]]`` extending ``phi0``.

    ``h`` has maximum degree 2, so vertices are placed along its paths and
    cycles; each candidate must be adjacent in ``g`` to the images of the
    already placed neighbours. The search is complete.
    """
    cfg = cfg or SearchConfig()
    t0 = time.monotonic()
    deadline = t0 + cfg.timeout
    phi0 = dict(phi0 or {})
    if any(h.degree(x) > 2 for x in range(h.n)):
        raise ValueError("h must have maximum degree 2")
    for x, v in phi0.items():
        if v not in set(classes[sigma[x]]):
            raise ValueError(f"prescribed image {v} of {x} is outside its class")
    if len(set(phi0.values())) != len(phi0):
        raise ValueError("prescription is not injective")
    nb_owner: dict[int, int] = {}
    for x in phi0:
        for y in h.neighbors(x):
            if y in nb_owner and nb_owner[y] != x:
                raise ValueError(f"prescribed vertices {nb_owner[y]} and {x} share the neighbour {y}")
            nb_owner[y] = x

    # placement order: walk each component starting from a prescribed vertex if any
    order: list[int] = []
    seen: set[int] = set()
    starts = sorted(phi0) + [x for x in range(h.n) if x not in phi0]
    for s in starts:
        if s in seen:
            continue
        stack = [s]
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            order.append(x)
            stack.extend(sorted(h.neighbors(x) - seen, reverse=True))
    adj = g.adjacency
    cls_sets = {lab: set(vs) for lab, vs in classes.items()}
    reserved = set(phi0.values())
    phi: dict[int, int] = {}
    used: set[int] = set()
    nodes = 0

    def candidates(x):
        placed = [phi[y] for y in h.neighbors(x) if y in phi]
        if x in phi0:
            v = phi0[x]
            return [v] if all(p in adj[v] for p in placed) else []
        pool = cls_sets[sigma[x]] - used - reserved
        for p in placed:
            pool &= adj[p]
        return sorted(pool)

    stack: list[tuple[int, list[int]]] = []
    i = 0
    while i < len(order):
        if time.monotonic() > deadline:
            return SearchOutcome(Verdict.TIMEOUT, None, nodes, time.monotonic() - t0)
        if len(stack) == i:
            stack.append((order[i], candidates(order[i])))
        x, cands = stack[i]
        if x in phi:
            used.discard(phi.pop(x))
        if not cands:
            stack.pop()
            i -= 1
            if i < 0:
                return SearchOutcome(Verdict.EXHAUSTED, None, nodes, time.monotonic() - t0)
            continue
        v = cands.pop(0)
        nodes += 1
        phi[x] = v
        used.add(v)
        i += 1
    for x, y in h.edges:
        assert phi[y] in adj[phi[x]]
    return SearchOutcome(Verdict.FOUND, dict(phi), nodes, time.monotonic() - t0)
