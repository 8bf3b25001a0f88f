from __future__ import annotations

import logging
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spslab.config import Limits
from spslab.errors import InputError, ResourceError
from spslab.partitions import (
    Chain,
    Partition,
    PartitionCollection,
    exhaustive_unbroken_chain,
    find_unbroken_chain,
    has_splitting_property,
    is_unbroken_chain,
    preserves,
    splits,
)


def singletons(n):
    return Partition.of([{e} for e in range(n)])


def labelled(labels):
    classes: dict[int, set[int]] = {}
    for e, label in enumerate(labels):
        classes.setdefault(label, set()).add(e)
    return Partition.of(classes.values())


@st.composite
def collections(draw):
    size = draw(st.integers(2, 6))
    labelling = st.lists(st.integers(0, size - 1), min_size=size, max_size=size).filter(
        lambda ls: len(set(ls)) > 1
    )
    count = draw(st.integers(size - 1, size + 1))
    parts = [labelled(draw(labelling)) for _ in range(count)]
    return PartitionCollection.of(range(size), parts)


class TestPartition:
    p = Partition.of([{0, 1}, {2}])

    def test_splits(self):
        assert splits(self.p, {1, 2})
        assert not splits(self.p, {0, 1})
        assert preserves(self.p, {2})

    def test_whole_universe_split_by_nontrivial(self):
        assert self.p.splits({0, 1, 2})

    def test_trivial(self):
        assert Partition.of([{0, 1, 2}]).is_trivial
        assert not self.p.is_trivial

    def test_class_of(self):
        assert self.p.class_of(1) == frozenset({0, 1})

    def test_class_of_unknown(self):
        with pytest.raises(InputError):
            self.p.class_of(7)

    def test_overlap_rejected(self):
        with pytest.raises(InputError, match="overlap"):
            Partition.of([{0, 1}, {1, 2}])

    def test_empty_class_rejected(self):
        with pytest.raises(InputError, match="nonempty"):
            Partition.of([{0}, set()])

    def test_collection_universe_mismatch(self):
        with pytest.raises(InputError, match="universe"):
            PartitionCollection.of(range(3), [Partition.of([{0}, {1}])])


class TestSplittingProperty:
    def test_holds(self):
        p = PartitionCollection.of(
            range(3), [Partition.of([{0}, {1, 2}]), Partition.of([{1}, {0, 2}])]
        )

        assert has_splitting_property(p)

    def test_trivial_partition_fails(self):
        p = PartitionCollection.of(range(3), [Partition.of([{0, 1, 2}])] * 2)

        assert not has_splitting_property(p)

    def test_subset_cap(self):
        p = PartitionCollection.of(range(5), [singletons(5)] * 4)

        with pytest.raises(ResourceError):
            has_splitting_property(p, Limits(max_subsets=8))


class TestUnbrokenChain:
    def test_coarse_and_fine(self):
        p = PartitionCollection.of(range(3), [Partition.of([{0, 1}, {2}]), singletons(3)])

        assert find_unbroken_chain(p) == Chain((frozenset({0, 1}),), (0,))

    def test_below_hypothesis_warns(self, caplog):
        p = PartitionCollection.of(range(3), [Partition.of([{0, 1}, {2}])])

        with caplog.at_level(logging.WARNING, logger="spslab.partitions"):
            chain = find_unbroken_chain(p)

        assert chain == Chain((frozenset({0, 1}),), (0,))
        assert "non-trivial partitions" in caplog.text

    def test_singleton_partitions(self):
        k = 4
        p = PartitionCollection.of(range(k), [singletons(k)] * (k - 1))
        chain = find_unbroken_chain(p)

        assert chain.sets == (frozenset({0}), frozenset({1}), frozenset({2}))
        assert chain.complement(p.universe) == frozenset({3})

    def test_checker_rejects_split_complement(self):
        p = PartitionCollection.of(range(3), [singletons(3), Partition.of([{0}, {1, 2}])])

        # {1, 2} is cut by the singleton partition
        assert not is_unbroken_chain(p, Chain((frozenset({0}),), (0,)))
        assert is_unbroken_chain(p, Chain((frozenset({0}),), (1,)))

    def test_checker_rejects_repeated_source(self):
        p = PartitionCollection.of(range(3), [singletons(3)] * 2)

        assert not is_unbroken_chain(p, Chain((frozenset({0}), frozenset({1})), (0, 0)))

    def test_checker_rejects_full_cover(self):
        p = PartitionCollection.of(range(2), [singletons(2)] * 2)

        assert not is_unbroken_chain(p, Chain((frozenset({0}), frozenset({1})), (0, 1)))

    def test_exhaustive(self):
        p = PartitionCollection.of(range(3), [Partition.of([{0, 1}, {2}]), singletons(3)])
        chain = exhaustive_unbroken_chain(p)

        assert is_unbroken_chain(p, chain)

    @given(collections())
    def test_always_found(self, p):
        chain = find_unbroken_chain(p)

        assert chain is not None
        assert is_unbroken_chain(p, chain)

    @pytest.mark.slow
    def test_seeded_thousand(self):
        rng = random.Random(2024)
        for _ in range(1000):
            size = rng.randint(3, 7)
            parts = []
            while len(parts) < size - 1 + rng.randint(0, 2):
                labels = [rng.randrange(size) for _ in range(size)]
                if len(set(labels)) > 1:
                    parts.append(labelled(labels))
            p = PartitionCollection.of(range(size), parts)
            chain = find_unbroken_chain(p)

            assert exhaustive_unbroken_chain(p) is not None
            assert chain is not None
            assert is_unbroken_chain(p, chain)

    @pytest.mark.slow
    def test_verdict_matches_exhaustive_below_hypothesis(self):
        rng = random.Random(77)
        for _ in range(1000):
            size = rng.randint(3, 7)
            count = rng.randint(0, size - 2)
            parts = [labelled([rng.randrange(size) for _ in range(size)]) for _ in range(count)]
            p = PartitionCollection.of(range(size), parts)
            chain = find_unbroken_chain(p)

            assert (chain is None) == (exhaustive_unbroken_chain(p) is None)
            if chain is not None:
                assert is_unbroken_chain(p, chain)
