"""Cyclic {3,4,5}-partitions of cycle lengths and their appearance counts."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .graph_core import CycleFactor

PARTS = (3, 4, 5)
PAIRS = tuple(itertools.product(PARTS, PARTS))
# block order of the long-cycle construction
RICH_BLOCKS = ((3, 3), (3, 4), (4, 4), (4, 5), (5, 5), (3, 5))


@dataclass(frozen=True, eq=False)
class CyclicPartition:
    """Cyclic sequence of parts from {3,4,5}.

    ``parts`` keeps the order it was built with (the homomorphism walk follows
    it); equality and hashing use the lexicographically least rotation.
    """

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(map(int, self.parts))
        if not parts:
            raise ValueError("a cyclic partition needs at least one part")
        if not set(parts) <= set(PARTS):
            raise ValueError(f"parts must lie in {{3,4,5}}, got {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def length(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def normal_form(self) -> tuple[int, ...]:
        p = self.parts
        return min(p[i:] + p[:i] for i in range(len(p)))

    def __eq__(self, other):
        if not isinstance(other, CyclicPartition):
            return NotImplemented
        return self.normal_form() == other.normal_form()

    def __hash__(self):
        return hash(self.normal_form())

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")"

    @classmethod
    def parse(cls, text: str) -> "CyclicPartition":
        return cls(tuple(int(tok) for tok in text.strip().strip("()").split(",") if tok.strip()))


def count_occurrences(p: CyclicPartition | Sequence[int], pattern: Sequence[int]) -> int:
    """Number of cyclic start positions at which ``pattern`` reads off ``p`` (wrapping as often as needed)."""
    parts = p.parts if isinstance(p, CyclicPartition) else tuple(p)
    pattern = tuple(pattern)
    if not pattern:
        raise ValueError("pattern must be nonempty")
    arr = np.asarray(parts, dtype=np.int8)
    idx = (np.arange(len(arr))[:, None] + np.arange(len(pattern))[None, :]) % len(arr)
    return int(np.all(arr[idx] == np.asarray(pattern, dtype=np.int8), axis=1).sum())


def pair_counts(p: CyclicPartition | Sequence[int]) -> dict[tuple[int, int], int]:
    parts = p.parts if isinstance(p, CyclicPartition) else tuple(p)
    arr = np.asarray(parts, dtype=np.int64)
    codes = np.bincount(3 * (arr - 3) + (np.roll(arr, -1) - 3), minlength=9)
    return {(a, b): int(codes[3 * (a - 3) + (b - 3)]) for a, b in PAIRS}


def rich_six_counts(p: CyclicPartition | Sequence[int]) -> dict[tuple[int, int], int]:
    """Appearances of ``(a,b)^6`` for all nine ordered pairs at once."""
    parts = p.parts if isinstance(p, CyclicPartition) else tuple(p)
    arr = np.asarray(parts, dtype=np.int64)
    t = len(arr)
    # code[i] names the pair starting at i; (a,b)^6 starts at i iff codes i, i+2, ..., i+10 agree
    code = 3 * (arr - 3) + (arr[(np.arange(t) + 1) % t] - 3)
    window = code[(np.arange(t)[:, None] + 2 * np.arange(6)[None, :]) % t]
    hit = np.all(window == window[:, :1], axis=1)
    counts = np.bincount(code[hit], minlength=9)
    return {(a, b): int(counts[3 * (a - 3) + (b - 3)]) for a, b in PAIRS}


def is_admissible(p: CyclicPartition | Sequence[int]) -> bool:
    counts = pair_counts(p)
    return all(counts[a, b] == counts[b, a] for a, b in PAIRS)


def _threes_then_fours(ell: int, min_each: int = 0) -> tuple[int, ...]:
    """``x`` threes then ``y`` fours with ``3x + 4y = ell``, ``y`` as small as possible."""
    for y in range(min_each, ell // 4 + 1):
        rest = ell - 4 * y
        if rest >= 3 * min_each and rest % 3 == 0:
            return (3,) * (rest // 3) + (4,) * y
    raise ValueError(f"{ell} is not of the form 3x + 4y")


@lru_cache(maxsize=None)
def admissible_partition(ell: int) -> CyclicPartition:
    """The canonical admissible partition used for cycles of length ``ell``.

    Short lengths use threes then fours; from 500 on, blocks of each pair are
    concatenated so every ``(a,b)^6`` pattern appears at least ``ell/200`` times.
    """
    if ell < 3:
        raise ValueError(f"no cyclic partition of {ell}")
    if ell == 5:
        return CyclicPartition((5,))
    if ell < 500:
        return CyclicPartition(_threes_then_fours(ell))
    hi = ell - 13
    ell_p = hi - hi % 48
    assert ell - 61 < ell_p <= ell - 13
    m = ell_p // 48
    parts: list[int] = []
    for pair in RICH_BLOCKS:
        parts.extend(pair * m)
    tail = _threes_then_fours(ell - ell_p, min_each=1)
    # fours first, then threes, so the junction pairs cancel
    parts.extend(sorted(tail, reverse=True))
    return CyclicPartition(tuple(parts))


@dataclass(frozen=True)
class CountTable:
    """Appearance counts of single parts and ordered adjacent pairs."""

    singles: dict[int, int]
    pairs: dict[tuple[int, int], int]
    _rich: dict[tuple[int, int], int] | None = field(default=None, compare=False, repr=False)
    _sources: tuple[CyclicPartition, ...] = field(default=(), compare=False, repr=False)

    @property
    def rich_six(self) -> dict[tuple[int, int], int]:
        """Counts of ``(a,b)^6``, computed on first use."""
        if self._rich is None:
            rich = dict.fromkeys(PAIRS, 0)
            for p in self._sources:
                for ab, c in rich_six_counts(p).items():
                    rich[ab] += c
            object.__setattr__(self, "_rich", rich)
        return self._rich

    def __add__(self, other: "CountTable") -> "CountTable":
        return CountTable(
            {a: self.singles[a] + other.singles[a] for a in PARTS},
            {ab: self.pairs[ab] + other.pairs[ab] for ab in PAIRS},
            None,
            self._sources + other._sources,
        )

    def as_dict(self) -> dict:
        return {
            "singles": {str(a): c for a, c in self.singles.items()},
            "pairs": {f"{a},{b}": c for (a, b), c in self.pairs.items()},
        }


def partition_counts(p: CyclicPartition) -> CountTable:
    singles = dict.fromkeys(PARTS, 0)
    for a in p.parts:
        singles[a] += 1
    return CountTable(singles, pair_counts(p), None, (p,))


Family = Callable[[int], CyclicPartition] | Mapping[int, CyclicPartition]


def family_lookup(family: Family | None) -> Callable[[int], CyclicPartition]:
    """Normalise a family argument: ``None`` is canonical, a mapping overrides some lengths."""
    if family is None:
        return admissible_partition
    if callable(family):
        return family
    overrides = dict(family)
    return lambda ell: overrides[ell] if ell in overrides else admissible_partition(ell)


def checked_partition(family: Callable[[int], CyclicPartition], ell: int) -> CyclicPartition:
    p = family(ell)
    if not isinstance(p, CyclicPartition):
        p = CyclicPartition(tuple(p))
    if p.length != ell:
        raise ValueError(f"family gives {p} for length {ell}, which sums to {p.length}")
    if not is_admissible(p):
        raise ValueError(f"family gives non-admissible partition {p} for length {ell}")
    return p


def factor_counts(f: CycleFactor | Iterable[int], family: Family | None = None) -> CountTable:
    """Counts summed over every cycle of ``f`` (or over a list of cycle lengths)."""
    lookup = family_lookup(family)
    lengths = [len(c) for c in f.cycles] if isinstance(f, CycleFactor) else list(f)
    total = CountTable(dict.fromkeys(PARTS, 0), dict.fromkeys(PAIRS, 0))
    for ell in lengths:
        total = total + partition_counts(checked_partition(lookup, ell))
    return total
