"""Partitions of a finite universe, the splitting property and unbroken chains.

A chain picks one class from each of several distinct partitions. It is
unbroken when the complement of the union is nonempty and no partition of the
chain cuts it. Any collection of at least |U|-1 non-trivial partitions has one.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass

from spslab.config import DEFAULT_LIMITS, Limits
from spslab.errors import InputError, check_cap

logger = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 8

Block = frozenset[int]


@dataclass(frozen=True)
class Partition:
    classes: tuple[Block, ...]

    def __post_init__(self) -> None:
        if any(not c for c in self.classes):
            raise InputError("partition classes must be nonempty")
        seen: set[int] = set()
        for c in self.classes:
            if seen & c:
                raise InputError("partition classes overlap")
            seen |= c

    @classmethod
    def of(cls, classes: Iterable[Iterable[int]]) -> Partition:
        blocks = [frozenset(c) for c in classes]
        if not all(blocks):
            raise InputError("partition classes must be nonempty")
        return cls(tuple(sorted(blocks, key=lambda b: (min(b), len(b)))))

    @property
    def universe(self) -> frozenset[int]:
        return frozenset().union(*self.classes)

    @property
    def is_trivial(self) -> bool:
        return len(self.classes) == 1

    def class_of(self, element: int) -> Block:
        for c in self.classes:
            if element in c:
                return c
        raise InputError(f"{element} is not in the partition's universe")

    def splits(self, s: Iterable[int]) -> bool:
        """Some class meets s without containing it."""
        s = frozenset(s)
        return any(c & s and not s <= c for c in self.classes)

    def preserves(self, s: Iterable[int]) -> bool:
        return not self.splits(s)


def splits(p: Partition, s: Iterable[int]) -> bool:
    return p.splits(s)


def preserves(p: Partition, s: Iterable[int]) -> bool:
    return p.preserves(s)


@dataclass(frozen=True)
class PartitionCollection:
    """A multiset of partitions of one universe."""

    universe: frozenset[int]
    partitions: tuple[Partition, ...]

    def __post_init__(self) -> None:
        for i, p in enumerate(self.partitions):
            if p.universe != self.universe:
                raise InputError(f"partition {i + 1} does not cover the universe exactly")

    @classmethod
    def of(cls, universe: Iterable[int], partitions: Iterable[Partition]) -> PartitionCollection:
        return cls(frozenset(universe), tuple(partitions))

    @property
    def nontrivial(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.partitions) if not p.is_trivial)

    @property
    def meets_hypothesis(self) -> bool:
        """At least |U|-1 partitions, none of them trivial."""
        return (
            len(self.nontrivial) == len(self.partitions)
            and len(self.partitions) >= len(self.universe) - 1
        )


@dataclass(frozen=True)
class Chain:
    sets: tuple[Block, ...]
    sources: tuple[int, ...]

    def complement(self, universe: frozenset[int]) -> frozenset[int]:
        return universe - frozenset().union(*self.sets)


def is_unbroken_chain(p: PartitionCollection, chain: Chain) -> bool:
    """Check a chain against the definition."""
    if not chain.sets or len(chain.sets) != len(chain.sources):
        return False
    if len(set(chain.sources)) != len(chain.sources):
        return False
    rest = chain.complement(p.universe)
    if not rest:
        return False
    for a, src in zip(chain.sets, chain.sources, strict=True):
        if not 0 <= src < len(p.partitions):
            return False
        part = p.partitions[src]
        if a not in part.classes or part.splits(rest):
            return False
    return True


def _subsets(elements: Sequence[Block]) -> Iterator[tuple[Block, ...]]:
    """Subsets of size >= 2, smallest first."""
    for size in range(2, len(elements) + 1):
        yield from itertools.combinations(elements, size)


def _union(blocks: Iterable[Block]) -> frozenset[int]:
    return frozenset().union(*blocks)


def _violation(
    blocks: Sequence[Block], parts: Sequence[Partition], limits: Limits
) -> tuple[Block, ...] | None:
    check_cap("max_subsets", 2 ** len(blocks), limits.max_subsets, "splitting-property subsets")
    for s in _subsets(blocks):
        union = _union(s)
        count = sum(1 for p in parts if p.splits(union))
        if count < len(s) - 1:
            return s
    return None


def has_splitting_property(p: PartitionCollection, limits: Limits = DEFAULT_LIMITS) -> bool:
    """Every S is split by at least |S|-1 partitions."""
    blocks = [frozenset([e]) for e in sorted(p.universe)]
    return _violation(blocks, p.partitions, limits) is None


class _Labelling:
    """Labels P_b splitting {b, last} for every block b but the last one."""

    def __init__(self, blocks: Sequence[Block], parts: Sequence[Partition], ids: Sequence[int]):
        self.blocks = list(blocks)
        self.parts = parts
        self.last = blocks[-1]
        self.labels: dict[Block, int] = {}
        self.pool: list[int] = list(ids)
        self.level: dict[Block, int] = {}
        self.e0: frozenset[int] = frozenset()
        self.steps = 0
        self.budget = 64 * len(blocks) ** 3 * max(len(ids), 1)

    def _tick(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise _LabellingFailed

    def below(self, level: int) -> frozenset[int]:
        """E_{<=level}: E_0 plus every labelled block at level 1..level."""
        chosen = [b for b, lvl in self.level.items() if lvl <= level]
        return self.e0.union(*chosen)

    def splits(self, idx: int, s: frozenset[int]) -> bool:
        return self.parts[idx].splits(s)

    def take_from_pool(self, s: frozenset[int]) -> int | None:
        for idx in self.pool:
            if self.splits(idx, s):
                self.pool.remove(idx)
                return idx
        return None

    def settle(self, hanging: int, top: int, target: Block) -> bool:
        """Push `hanging` back into the pool or label it; True when it splits E_0."""
        while True:
            self._tick()
            if self.splits(hanging, self.e0):
                self.labels[target] = hanging
                return True
            moved = False
            for lvl in range(top - 1):
                base = self.below(lvl)
                for c in self._at_level(lvl + 1):
                    if self.splits(hanging, base | c):
                        hanging, self.labels[c] = self.labels[c], hanging
                        self.level[c] = lvl + 2
                        moved = True
                        break
                if moved:
                    break
            if not moved:
                self.pool.append(hanging)
                return False

    def _at_level(self, lvl: int) -> list[Block]:
        return [b for b in self.blocks if self.level.get(b) == lvl]

    def phase(self, target: Block) -> None:
        self.e0 = target | self.last
        idx = self.take_from_pool(self.e0)
        if idx is not None:
            self.labels[target] = idx
            return
        self.level = {b: 1 for b in self.labels}
        j = 1
        while True:
            self._tick()
            progressed = True
            while progressed:
                progressed = False
                base = self.below(j - 1)
                for b in self._at_level(j):
                    idx = self.take_from_pool(base | b)
                    if idx is None:
                        continue
                    hanging = self.labels[b]
                    self.labels[b] = idx
                    self.level[b] = j + 1
                    if self.settle(hanging, j, target):
                        return
                    progressed = True
                    break
            if not self._at_level(j + 1):
                raise _LabellingFailed
            j += 1
            if j > len(self.blocks):
                raise _LabellingFailed

    def run(self) -> dict[Block, int]:
        for b in self.blocks[:-1]:
            self.phase(b)
        return self.labels


class _LabellingFailed(Exception):
    pass


def _claim_chain(
    blocks: Sequence[Block], parts: Sequence[Partition], ids: Sequence[int]
) -> Chain | None:
    """Chain whose complement is the last block, for a collection with the splitting property."""
    if len(blocks) < 2 or len(ids) < len(blocks) - 1:
        return None
    labelling = _Labelling(blocks, parts, ids)
    try:
        labels = labelling.run()
    except _LabellingFailed:
        logger.debug("labelling gave up on %d blocks", len(blocks))
        return None
    last = blocks[-1]
    sets = []
    sources = []
    for b in blocks[:-1]:
        idx = labels[b]
        cls = parts[idx].class_of(min(b))
        if cls & last:
            return None
        sets.append(cls)
        sources.append(idx)
    return Chain(tuple(sets), tuple(sources))


def _lemma_chain(
    blocks: Sequence[Block], parts: Sequence[Partition], ids: Sequence[int], limits: Limits
) -> Chain | None:
    """Merge a badly split S and recurse; otherwise label a chain directly."""
    if len(blocks) < 2:
        return None
    active = [parts[i] for i in ids]
    s = _violation(blocks, active, limits)
    if s is None:
        return _claim_chain(blocks, parts, ids)
    merged = _union(s)
    logger.debug("merging %s", sorted(merged))
    keep = [i for i in ids if parts[i].preserves(merged)]
    rest = [b for b in blocks if b not in s]
    new_blocks = sorted([*rest, merged], key=min)
    return _lemma_chain(new_blocks, parts, keep, limits)


def _trim(p: PartitionCollection, chain: Chain) -> Chain:
    """Drop sets that do not change the union, last first."""
    sets, sources = list(chain.sets), list(chain.sources)
    for pos in reversed(range(len(sets))):
        others = sets[:pos] + sets[pos + 1 :]
        if others and _union(others) == _union(sets):
            del sets[pos]
            del sources[pos]
    return Chain(tuple(sets), tuple(sources))


def exhaustive_unbroken_chain(p: PartitionCollection) -> Chain | None:
    """First unbroken chain by complement size, then a depth-first cover."""
    universe = sorted(p.universe)
    for size in range(1, len(universe)):
        for rest_t in itertools.combinations(universe, size):
            rest = frozenset(rest_t)
            eligible = [i for i, part in enumerate(p.partitions) if part.preserves(rest)]
            found = _cover(p, p.universe - rest, rest, eligible, (), ())
            if found is not None:
                return found
    return None


def _cover(
    p: PartitionCollection,
    todo: frozenset[int],
    rest: frozenset[int],
    eligible: Sequence[int],
    sets: tuple[Block, ...],
    sources: tuple[int, ...],
) -> Chain | None:
    if not todo:
        return Chain(sets, sources)
    e = min(todo)
    for idx in eligible:
        if idx in sources:
            continue
        cls = p.partitions[idx].class_of(e)
        if cls & rest:
            continue
        found = _cover(p, todo - cls, rest, eligible, (*sets, cls), (*sources, idx))
        if found is not None:
            return found
    return None


def find_unbroken_chain(
    p: PartitionCollection, limits: Limits = DEFAULT_LIMITS
) -> Chain | None:
    if not p.meets_hypothesis:
        logger.warning(
            "collection has %d non-trivial partitions of %d partitions on %d elements",
            len(p.nontrivial),
            len(p.partitions),
            len(p.universe),
        )
    blocks = [frozenset([e]) for e in sorted(p.universe)]
    chain = _lemma_chain(blocks, p.partitions, p.nontrivial, limits)
    if chain is not None:
        chain = _trim(p, chain)
        if is_unbroken_chain(p, chain):
            return chain
        logger.warning("constructed chain failed its check; falling back to search")
    if len(p.universe) <= EXHAUSTIVE_LIMIT:
        return exhaustive_unbroken_chain(p)
    return None
