"""Targets in F and the local surgery on the homomorphism that absorbs atoms."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Mapping, Sequence

from ..gadget import R_ARCS, FHomomorphism
from ..graph_core import CycleFactor
from .atoms import SHAPE_OF_LENGTH, Atom, d_cycle

TARGET_LENGTHS = (3, 4, 5, 7, 8, 9)


class InsufficientTargetsError(ValueError):
    pass


@dataclass(frozen=True)
class Target:
    """Path ``x_1 .. x_{5l+1}`` of a cycle of F whose image winds five times around ``D_l``."""

    path: tuple[int, ...]
    ell: int


def _is_target(images: Sequence[str], dl: tuple[str, ...]) -> bool:
    ell = len(dl)
    if images[0] not in dl:
        return False
    z0 = dl.index(images[0])
    return all(images[k] == dl[(z0 + k) % ell] for k in range(len(images)))


def find_targets(f: CycleFactor, hom: FHomomorphism, need: Mapping[int, int]) -> dict[int, list[Target]]:
    """Greedily pick vertex-disjoint ``l``-targets, ``need[l]`` of each length.

    Lengths are served in decreasing order so the long windows are claimed
    before short ones fragment the cycles.
    """
    used: set[int] = set()
    out: dict[int, list[Target]] = {ell: [] for ell in need}
    for ell in sorted(need, reverse=True):
        if ell not in SHAPE_OF_LENGTH:
            raise ValueError(f"no target length {ell}")
        want = need[ell]
        if want <= 0:
            continue
        dl = d_cycle(SHAPE_OF_LENGTH[ell])
        span = 5 * ell + 1
        for cyc in f.cycles:
            L = len(cyc)
            if L < span or len(out[ell]) >= want:
                continue
            images = [hom.sigma[x] for x in cyc]
            s = 0
            while s < L and len(out[ell]) < want:
                idx = [(s + k) % L for k in range(span)]
                path = tuple(cyc[i] for i in idx)
                if not used.intersection(path) and _is_target([images[i] for i in idx], dl):
                    out[ell].append(Target(path, ell))
                    used.update(path)
                    s += span
                else:
                    s += 1
        if len(out[ell]) < want:
            raise InsufficientTargetsError(f"found {len(out[ell])} disjoint {ell}-targets, {want} needed")
    return out


def step_length(ell: int) -> int:
    """Spacing ``g`` of marked edges along a target."""
    g = 4 if ell in (4, 5, 7, 8) else 5
    if gcd(g - 1, ell) != 1:
        raise AssertionError(f"g - 1 = {g - 1} is not coprime to {ell}")
    return g


@dataclass(frozen=True)
class SurgeryResult:
    sigma_prime: dict[int, str]
    # per atom: marked F-edges (x_tail, x_head) in order i = 1..l
    marked: tuple[tuple[tuple[int, int], ...], ...]
    # partial embedding of marked endpoints onto the atom vertices
    prescribed: dict[int, int]
    # per atom: stop indices j_1..j_l (1-based positions on D_l)
    stops: tuple[tuple[int, ...], ...]
    tails: frozenset[int] = field(default=frozenset())
    heads: frozenset[int] = field(default=frozenset())


def absorb_atoms_into_homomorphism(
    f: CycleFactor, hom: FHomomorphism, atoms: Sequence[Atom], targets: Sequence[Target]
) -> SurgeryResult:
    """Rewrite ``sigma`` on one target per atom so the marked edges can land on the atom.

    ``atoms[k]`` is absorbed on ``targets[k]``; atom edges are ``(tail, head)``.
    """
    if len(atoms) != len(targets):
        raise ValueError(f"{len(atoms)} atoms but {len(targets)} targets")
    sigma = dict(hom.sigma)
    marked, stops = [], []
    phi: dict[int, int] = {}
    tails, heads = set(), set()
    seen: set[int] = set()
    for atom, tgt in zip(atoms, targets):
        ell = atom.size
        if tgt.ell != ell:
            raise ValueError(f"atom of size {ell} assigned to a {tgt.ell}-target")
        if seen.intersection(tgt.path):
            raise ValueError("targets overlap")
        seen.update(tgt.path)
        dl = d_cycle(atom.kind)
        x = tgt.path
        z0 = dl.index(hom.sigma[x[0]])
        zs = [dl[(z0 + k) % ell] for k in range(ell)]  # Z_1 .. Z_l
        edge_in = {lab: e for lab, e in zip(dl, atom.edges)}
        g = step_length(ell)
        mark_pos = {1 + g * (i - 1) for i in range(1, ell + 1)}  # 0-based index of x_{2+g(i-1)}
        cur = 0
        new = [zs[0]]
        for k in range(5 * ell):
            if k not in mark_pos:
                cur = (cur + 1) % ell
            new.append(zs[cur])
        assert new[-1] == zs[0]
        for v, lab in zip(x, new):
            sigma[v] = lab
        js, marks = [], []
        for i in range(1, ell + 1):
            k = 1 + g * (i - 1)
            j = zs.index(new[k])
            js.append(j + 1)
            tail, head = edge_in[zs[j]]
            phi[x[k]] = tail
            phi[x[k + 1]] = head
            tails.add(x[k])
            heads.add(x[k + 1])
            marks.append((x[k], x[k + 1]))
        if sorted(js) != list(range(1, ell + 1)):
            raise AssertionError(f"stops {js} do not cover D_{ell}")
        marked.append(tuple(marks))
        stops.append(tuple(js))
    return SurgeryResult(sigma, tuple(marked), phi, tuple(stops), frozenset(tails), frozenset(heads))


def surgery_report(f: CycleFactor, hom: FHomomorphism, atoms: Sequence[Atom], res: SurgeryResult) -> list[str]:
    """Violations of class conservation, the homomorphism property, the matching image and degree bookkeeping."""
    problems = []
    before: dict[str, int] = {}
    after: dict[str, int] = {}
    for v in range(f.n):
        before[hom.sigma[v]] = before.get(hom.sigma[v], 0) + 1
        after[res.sigma_prime[v]] = after.get(res.sigma_prime[v], 0) + 1
    if before != after:
        problems.append("class counts changed")
    marked = {e for m in res.marked for e in m}
    out_deg = dict.fromkeys(range(f.n), 0)
    in_deg = dict.fromkeys(range(f.n), 0)
    for x, y in hom.arcs:
        if (x, y) in marked:
            continue
        out_deg[x] += 1
        in_deg[y] += 1
        if (res.sigma_prime[x], res.sigma_prime[y]) not in R_ARCS:
            problems.append(f"arc {x}->{y} is not mapped onto an arc of R")
    for v in range(f.n):
        want_out = 0 if v in res.tails else 1
        want_in = 0 if v in res.heads else 1
        if out_deg[v] != want_out or in_deg[v] != want_in:
            problems.append(f"vertex {v} has degrees out {out_deg[v]}, in {in_deg[v]}")
    image = {(res.prescribed[x], res.prescribed[y]) for x, y in marked}
    want = {e for o in atoms for e in o.edges}
    if image != want:
        problems.append("marked edges do not map onto the oriented matching")
    for m in res.marked:
        for x, y in m:
            if res.sigma_prime[x] != res.sigma_prime[y]:
                problems.append(f"marked edge {(x, y)} is split across classes")
    for st, o in zip(res.stops, atoms):
        if sorted(st) != list(range(1, o.size + 1)):
            problems.append(f"stops {st} miss a class of D_{o.size}")
    return problems
