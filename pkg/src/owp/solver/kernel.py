"""Resumable backtracking kernel for cycle-factor decompositions.

The search assigns factors one at a time. A factor is grown cycle by cycle;
each cycle starts at the lowest vertex of the factor's vertex set not yet
covered by the factor and is extended one vertex per decision. Every
decision is a frame on an explicit stack, so the kernel can stop after a
node budget and resume later from the same arrays.

Vertex sets and adjacency rows are int64 bitmasks, which limits the order
to 62 vertices.

Frame kinds::

    TYPE  choose the cycle type of factor ``k``
    LEN   choose the length of the cycle starting at ``s``
    VERT  choose the vertex at position ``j`` of the current cycle
"""

from __future__ import annotations

import numpy as np

from .._jit import njit

MAX_ORDER = 62
MAX_LEN = 62

TYPE, LEN, VERT = 0, 1, 2
RUNNING, FOUND, EXHAUSTED, BUDGET = 0, 1, 2, 3

# slots of the scalar state vector
S_DEPTH, S_NODES, S_SPLIT_COUNT, S_USED, S_STATUS = 0, 1, 2, 3, 4
N_SCALARS = 8

# frame fields
F_KIND, F_CAND, F_VAL, F_K, F_T, F_S, F_L, F_J, F_PREV, F_SECOND, F_USED = range(11)
N_FIELDS = 11


@njit(cache=True)
def popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def lowest_bit_index(x):
    """Index of the lowest set bit of a positive int64."""
    i = 0
    if (x & 0xFFFFFFFF) == 0:
        x >>= 32
        i += 32
    if (x & 0xFFFF) == 0:
        x >>= 16
        i += 16
    if (x & 0xFF) == 0:
        x >>= 8
        i += 8
    if (x & 0xF) == 0:
        x >>= 4
        i += 4
    if (x & 0x3) == 0:
        x >>= 2
        i += 2
    if (x & 0x1) == 0:
        i += 1
    return i


@njit(cache=True)
def _factor_feasible(adj, smask, used, s, prev):
    """Every vertex still outside the factor keeps two usable edges."""
    free = smask & ~used
    ends = free | (np.int64(1) << s) | (np.int64(1) << prev)
    rest = free
    while rest:
        v = lowest_bit_index(rest)
        rest &= rest - 1
        if popcount(adj[v] & ends) < 2:
            return False
    return True


@njit(cache=True)
def _type_candidates(k, seq, mult):
    if seq[k] >= 0:
        if mult[seq[k]] > 0:
            return np.int64(1) << seq[k]
        return np.int64(0)
    cand = np.int64(0)
    for t in range(mult.shape[0]):
        if mult[t] > 0:
            cand |= np.int64(1) << t
    return cand


@njit(cache=True)
def _push_len(frames, d, k, t, used, smask, pos_mask, lenrem):
    start = smask & ~used & pos_mask[0]
    frames[d, F_KIND] = LEN
    frames[d, F_VAL] = -1
    frames[d, F_K] = k
    frames[d, F_T] = t
    frames[d, F_USED] = used
    if start == 0:
        frames[d, F_CAND] = 0
        frames[d, F_S] = -1
        return
    frames[d, F_S] = lowest_bit_index(start)
    cand = np.int64(0)
    for L in range(3, lenrem.shape[0]):
        if lenrem[L] > 0:
            cand |= np.int64(1) << L
    frames[d, F_CAND] = cand


@njit(cache=True)
def _push_vert(frames, d, k, t, s, L, j, prev, second, used, adj, smask, pos_mask, anchor, dir_canon, forward):
    frames[d, F_KIND] = VERT
    frames[d, F_VAL] = -1
    frames[d, F_K] = k
    frames[d, F_T] = t
    frames[d, F_S] = s
    frames[d, F_L] = L
    frames[d, F_J] = j
    frames[d, F_PREV] = prev
    frames[d, F_SECOND] = second
    frames[d, F_USED] = used
    P = pos_mask.shape[0]
    cand = adj[prev] & smask & ~used & pos_mask[j % P]
    if j == L - 1:
        cand &= adj[s]
        if dir_canon:
            cand &= ~((np.int64(1) << (second + 1)) - 1)
    if anchor and j == 1 and used == (np.int64(1) << s):
        # first cycle of a factor: it must use the least remaining edge at the anchor
        cand = adj[s] & smask & pos_mask[1 % P]
        cand &= -cand
    if cand and forward and not _factor_feasible(adj, smask, used, s, prev):
        cand = 0
    frames[d, F_CAND] = cand


@njit(cache=True, nogil=True)
def run(
    adj,
    lens,
    smasks,
    mult,
    seq,
    pos_mask,
    anchor,
    dir_canon,
    forward,
    frames,
    lenrem,
    scal,
    budget,
    split_depth,
    n_workers,
    worker,
):
    """Advance the search by at most ``budget`` nodes.

    ``adj``, ``mult``, ``frames``, ``lenrem`` and ``scal`` hold the mutable
    search state and are updated in place. Returns the status code, also
    stored in ``scal[S_STATUS]``. A fresh state has ``scal[S_DEPTH] == -1``.
    """
    K = seq.shape[0]
    d = scal[S_DEPTH]
    if d == -1:
        if K == 0:
            scal[S_STATUS] = FOUND
            return FOUND
        d = 0
        frames[0, F_KIND] = TYPE
        frames[0, F_CAND] = _type_candidates(0, seq, mult)
        frames[0, F_VAL] = -1
        frames[0, F_K] = 0
        frames[0, F_USED] = 0
    stop = scal[S_NODES] + budget
    while True:
        if scal[S_NODES] >= stop:
            scal[S_DEPTH] = d
            scal[S_STATUS] = BUDGET
            return BUDGET
        kind = frames[d, F_KIND]
        val = frames[d, F_VAL]
        # undo the previous choice of this frame
        if val >= 0:
            if kind == TYPE:
                mult[val] += 1
                lenrem[:] = 0
            elif kind == LEN:
                lenrem[val] += 1
            else:
                prev = frames[d, F_PREV]
                adj[prev] |= np.int64(1) << val
                adj[val] |= np.int64(1) << prev
                if frames[d, F_J] == frames[d, F_L] - 1:
                    s = frames[d, F_S]
                    adj[s] |= np.int64(1) << val
                    adj[val] |= np.int64(1) << s
            frames[d, F_VAL] = -1
        cand = frames[d, F_CAND]
        if cand == 0:
            d -= 1
            if d < 0:
                scal[S_DEPTH] = -2
                scal[S_STATUS] = EXHAUSTED
                return EXHAUSTED
            continue
        low = cand & -cand
        frames[d, F_CAND] = cand ^ low
        x = lowest_bit_index(low)
        if d == split_depth:
            c = scal[S_SPLIT_COUNT]
            scal[S_SPLIT_COUNT] = c + 1
            if c % n_workers != worker:
                continue
        scal[S_NODES] += 1
        frames[d, F_VAL] = x
        k = frames[d, F_K]
        # apply the choice and open the next frame
        if kind == TYPE:
            mult[x] -= 1
            lenrem[:] = lens[x]
            _push_len(frames, d + 1, k, x, np.int64(0), smasks[x], pos_mask, lenrem)
            d += 1
            continue
        t = frames[d, F_T]
        smask = smasks[t]
        if kind == LEN:
            lenrem[x] -= 1
            s = frames[d, F_S]
            used = frames[d, F_USED] | (np.int64(1) << s)
            _push_vert(frames, d + 1, k, t, s, x, 1, s, -1, used, adj, smask, pos_mask, anchor, dir_canon, forward)
            d += 1
            continue
        # VERT
        prev = frames[d, F_PREV]
        s = frames[d, F_S]
        L = frames[d, F_L]
        j = frames[d, F_J]
        adj[prev] &= ~(np.int64(1) << x)
        adj[x] &= ~(np.int64(1) << prev)
        used = frames[d, F_USED] | (np.int64(1) << x)
        second = frames[d, F_SECOND]
        if j == 1:
            second = x
        if j < L - 1:
            _push_vert(frames, d + 1, k, t, s, L, j + 1, x, second, used, adj, smask, pos_mask, anchor, dir_canon, forward)
            d += 1
            continue
        adj[s] &= ~(np.int64(1) << x)
        adj[x] &= ~(np.int64(1) << s)
        if used != smask:
            _push_len(frames, d + 1, k, t, used, smask, pos_mask, lenrem)
            d += 1
            continue
        if k + 1 == K:
            scal[S_DEPTH] = d
            scal[S_STATUS] = FOUND
            return FOUND
        d += 1
        frames[d, F_KIND] = TYPE
        frames[d, F_CAND] = _type_candidates(k + 1, seq, mult)
        frames[d, F_VAL] = -1
        frames[d, F_K] = k + 1
        frames[d, F_USED] = 0


def new_state(n: int, n_factors: int, mult: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Fresh ``(frames, lenrem, scal, mult)`` arrays for a search with ``n_factors`` factors."""
    depth = max(1, n_factors * (2 * n + 2))
    frames = np.zeros((depth, N_FIELDS), dtype=np.int64)
    lenrem = np.zeros(MAX_LEN + 1, dtype=np.int64)
    scal = np.zeros(N_SCALARS, dtype=np.int64)
    scal[S_DEPTH] = -1
    return frames, lenrem, scal, np.array(mult, dtype=np.int64)


def decode(frames: np.ndarray, depth: int) -> list[tuple[int, list[list[int]]]]:
    """Rebuild ``(type index, cycles)`` per factor from the frames of a found state."""
    out: list[tuple[int, list[list[int]]]] = []
    for d in range(depth + 1):
        kind, val = int(frames[d, F_KIND]), int(frames[d, F_VAL])
        if kind == TYPE:
            out.append((val, []))
        elif kind == LEN:
            out[-1][1].append([int(frames[d, F_S])])
        else:
            out[-1][1][-1].append(val)
    return out
