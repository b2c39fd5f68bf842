import random

import pytest
from hypothesis import given, settings, strategies as st

from owp.graph_core import CycleFactor
from owp.partitions import (
    PAIRS,
    CyclicPartition,
    admissible_partition,
    count_occurrences,
    factor_counts,
    is_admissible,
    pair_counts,
    rich_six_counts,
)


def naive_count(parts, pattern):
    t = len(parts)
    return sum(all(parts[(i + j) % t] == pattern[j] for j in range(len(pattern))) for i in range(t))


def test_count_occurrences_examples():
    assert count_occurrences(CyclicPartition((3,)), (3, 3)) == 1
    assert count_occurrences(CyclicPartition((3, 4)), (4, 3)) == 1
    assert count_occurrences(CyclicPartition((3, 3, 4)), (3,)) == 2


def test_is_admissible_examples():
    assert is_admissible(CyclicPartition((3,)))
    assert is_admissible(CyclicPartition((3, 4)))
    assert is_admissible(CyclicPartition((3, 4, 3, 5)))
    assert not is_admissible(CyclicPartition((3, 4, 5)))


def test_admissible_partition_examples():
    assert admissible_partition(5).parts == (5,)
    assert admissible_partition(7).parts == (3, 4)
    assert admissible_partition(6).parts == (3, 3)
    assert admissible_partition(11).parts == (3, 4, 4)
    p = admissible_partition(500)
    assert all(naive_count(p.parts, (a, b) * 6) >= 3 for a, b in PAIRS)


def test_rotation_equality():
    assert CyclicPartition((3, 4, 5)) == CyclicPartition((5, 3, 4))
    assert hash(CyclicPartition((4, 5, 3))) == hash(CyclicPartition((3, 4, 5)))
    assert CyclicPartition((3, 4, 5)) != CyclicPartition((3, 5, 4))
    assert CyclicPartition.parse("(4,3,3)") == CyclicPartition((3, 3, 4))
    with pytest.raises(ValueError):
        CyclicPartition((3, 6))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from((3, 4, 5)), min_size=1, max_size=30), st.lists(st.sampled_from((3, 4, 5)), min_size=1, max_size=4))
def test_counting_matches_naive(parts, pattern):
    p = CyclicPartition(tuple(parts))
    assert count_occurrences(p, pattern) == naive_count(parts, pattern)
    pc = pair_counts(p)
    assert all(pc[a, b] == naive_count(parts, (a, b)) for a, b in PAIRS)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from((3, 4, 5)), min_size=1, max_size=40))
def test_rich_six_matches_naive(parts):
    got = rich_six_counts(parts)
    assert all(got[a, b] == naive_count(parts, (a, b) * 6) for a, b in PAIRS)


@pytest.mark.parametrize("ell", list(range(3, 60)) + [499, 500, 501, 777, 1000, 2401])
def test_fact_identities(ell):
    p = admissible_partition(ell)
    counts = factor_counts([ell])
    assert sum(a * c for a, c in counts.singles.items()) == ell
    for a in (3, 4, 5):
        assert counts.singles[a] == sum(counts.pairs[a, b] for b in (3, 4, 5))
    assert is_admissible(p) and p.length == ell


def test_factor_counts_examples():
    c7 = factor_counts(CycleFactor(7, [tuple(range(7))]))
    assert c7.singles == {3: 1, 4: 1, 5: 0}
    assert {k: v for k, v in c7.pairs.items() if v} == {(3, 4): 1, (4, 3): 1}
    c5 = factor_counts([5])
    assert c5.singles == {3: 0, 4: 0, 5: 1} and {k: v for k, v in c5.pairs.items() if v} == {(5, 5): 1}
    c66 = factor_counts([6, 6])
    assert c66.singles == {3: 4, 4: 0, 5: 0} and {k: v for k, v in c66.pairs.items() if v} == {(3, 3): 4}


def test_factor_counts_additive():
    rng = random.Random(2)
    for _ in range(30):
        xs = [rng.randint(3, 700) for _ in range(rng.randint(1, 4))]
        ys = [rng.randint(3, 700) for _ in range(rng.randint(1, 4))]
        assert factor_counts(xs) + factor_counts(ys) == factor_counts(xs + ys)


def test_family_override():
    fam = {12: CyclicPartition((4, 4, 4))}
    assert factor_counts([12], fam).singles[4] == 3
    with pytest.raises(ValueError):
        factor_counts([12], {12: CyclicPartition((3, 4, 5))})


def test_rich_six_lazy_on_table():
    t = factor_counts([600, 700])
    assert t._rich is None
    assert all(t.rich_six[ab] >= 6 for ab in PAIRS)
