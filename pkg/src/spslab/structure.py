"""Truncation, families and partitions of an identity, and its rank bounds.

Given a nucleus K and a monic frame F^n = F*y0 + U + K, every form outside K
truncates to y0 + u/alpha. Forms similar modulo K share a family: the k
products of the matching forms in each term, grouped into a partition of the
terms by similarity.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from spslab.circuits import (
    MultTerm,
    SPSCircuit,
    circuit_rank,
    decompose_strongly_minimal,
    gcd_and_simple,
    ind_fanin,
    is_identity,
    vanishing_subset,
)
from spslab.config import DEFAULT_LIMITS, Limits
from spslab.errors import InputError, PreconditionError, ResourceError
from spslab.linalg import FormVec, Subspace, add, orthogonal_decompose, quotient_rank, scale
from spslab.nucleus import MonicFrame, NucleusReport, build_nucleus, make_monic
from spslab.partitions import Chain, Partition
from spslab.paths import find_certificate
from spslab.pit import rank_bound
from spslab.sg import SGConfig, sg_bound, sg_operator

logger = logging.getLogger(__name__)


# truncation


def trun(form: FormVec, frame: MonicFrame) -> FormVec:
    """y0 + u/alpha for form = alpha*y0 + u + v."""
    alpha, u, _ = orthogonal_decompose(form, frame.y0, frame.u_space, frame.k_space)
    if not alpha:
        raise PreconditionError("form not monic; run make_monic first", detail=form)
    return add(frame.y0, scale(frame.k_space.field.one / alpha, u))


def trun_set(forms: Iterable[FormVec], frame: MonicFrame) -> tuple[FormVec, ...]:
    """Distinct truncations in first-occurrence order."""
    return tuple(dict.fromkeys(trun(f, frame) for f in forms))


# families


@dataclass(frozen=True)
class FamilyRow:
    rep: FormVec
    fam: tuple[MultTerm, ...]
    part: Partition

    @property
    def degree(self) -> int | None:
        """Common degree of the entries, None if they disagree."""
        degrees = {f.degree for f in self.fam}
        return degrees.pop() if len(degrees) == 1 else None


@dataclass(frozen=True)
class FamilyTable:
    k_space: Subspace
    rows: tuple[FamilyRow, ...]

    def row_for(self, form: FormVec) -> FamilyRow:
        key = self.k_space.class_key(form)
        for row in self.rows:
            if self.k_space.class_key(row.rep) == key:
                return row
        raise InputError("form has no family: it lies in K or outside the circuit")

    @property
    def trivial_rows(self) -> tuple[FamilyRow, ...]:
        return tuple(r for r in self.rows if r.part.is_trivial)

    @property
    def degrees_agree(self) -> bool:
        return all(r.degree is not None for r in self.rows)


def _similarity_key(t: MultTerm) -> frozenset:
    return frozenset(t.classes().items())


def family_table(
    c: SPSCircuit, nucleus: NucleusReport | Subspace, frame: MonicFrame | None = None
) -> FamilyTable:
    """fam(l) and Part(l) for one representative of each K-class of L^c_K(C).

    With a frame the table is computed on tau(C); tau fixes K.
    """
    space = nucleus.k_space if isinstance(nucleus, NucleusReport) else nucleus
    if frame is not None:
        c = frame.apply(c)
    fs = c.field
    reps: dict[FormVec, FormVec] = {}
    for f in c.forms():
        if f not in space:
            reps.setdefault(space.class_key(f), f)

    rows = []
    for key, rep in reps.items():
        fam = tuple(
            MultTerm(fs.one, tuple(f for f in t.forms if space.class_key(f) == key))
            for t in c.terms
        )
        groups: dict[frozenset, list[int]] = {}
        for i, entry in enumerate(fam):
            groups.setdefault(_similarity_key(entry), []).append(i)
        rows.append(FamilyRow(rep, fam, Partition.of(groups.values())))
    table = FamilyTable(space, tuple(rows))
    if table.trivial_rows:
        logger.info("%d families induce the trivial partition", len(table.trivial_rows))
    return table


# split property


@dataclass(frozen=True)
class SplitCheck:
    """Every class choice leaves a complement some chosen partition splits."""

    holds: bool
    counterexample: Chain | None
    examined: int
    truncated: bool = False


def check_split_property(
    parts: Sequence[Partition], limits: Limits = DEFAULT_LIMITS, truncate: bool = False
) -> SplitCheck:
    """Search for a choice of classes whose nonempty complement no chosen partition splits.

    Such a choice is an unbroken chain. Past max_subsets choices the search
    raises ResourceError, or stops early with `truncate=True`.
    """
    if not parts:
        return SplitCheck(True, None, 0)
    universe = parts[0].universe
    if any(p.universe != universe for p in parts):
        raise InputError("partitions cover different universes")
    total = math.prod(len(p.classes) + 1 for p in parts) - 1
    if total > limits.max_subsets and not truncate:
        raise ResourceError(
            f"split check needs {total} class choices, above max_subsets={limits.max_subsets}",
            cap="max_subsets",
            required=total,
        )
    truncated = total > limits.max_subsets
    if truncated:
        logger.warning(
            "split check truncated to %d of %d class choices", limits.max_subsets, total
        )

    options = [(None, *p.classes) for p in parts]
    examined = 0
    for choice in itertools.product(*options):
        picked = [(i, a) for i, a in enumerate(choice) if a is not None]
        if not picked:
            continue
        examined += 1
        if examined > limits.max_subsets:
            return SplitCheck(True, None, examined - 1, True)
        rest = universe - frozenset().union(*(a for _, a in picked))
        if not rest:
            continue
        if all(parts[i].preserves(rest) for i, _ in picked):
            chain = Chain(tuple(a for _, a in picked), tuple(i for i, _ in picked))
            logger.info("class choice %s leaves %s unsplit", chain.sets, sorted(rest))
            return SplitCheck(False, chain, examined, truncated)
    return SplitCheck(True, None, examined, truncated)


@dataclass(frozen=True)
class SplitLemmaResult:
    holds: bool
    vacuous: bool
    witness: tuple[FormVec, ...] = ()
    sources: tuple[FormVec, ...] = ()
    partitions: tuple[Partition, ...] = ()
    check: SplitCheck | None = None


def _is_strongly_minimal(c: SPSCircuit, limits: Limits) -> bool:
    return ind_fanin(c, limits) == c.fanin - 1


def verify_split_lemma(
    c: SPSCircuit,
    nucleus: NucleusReport,
    frame: MonicFrame | None = None,
    limits: Limits = DEFAULT_LIMITS,
    truncate: bool = False,
) -> SplitLemmaResult:
    """Run SG_{k-1} on trun(L^c_K(T_1)) and check its partitions split every complement."""
    if gcd_and_simple(c)[0].degree:
        raise PreconditionError("circuit is not simple")
    if not _is_strongly_minimal(c, limits):
        raise PreconditionError("circuit is not strongly minimal")
    k = c.fanin
    space = nucleus.k_space
    if k < 3 or all(f in space for f in c.terms[0].forms):
        return SplitLemmaResult(True, True)
    if frame is None:
        frame = make_monic(c, space)
    image = frame.apply(c)
    outside = [f for f in image.terms[0].forms if f not in space]

    sources: dict[FormVec, FormVec] = {}
    for f in outside:
        sources.setdefault(trun(f, frame), f)
    config = SGConfig(c.field, tuple(sources))
    op = sg_operator(config, k - 1, limits)
    if op.closed:
        logger.debug("trun set of rank %d is SG_%d-closed", config.rank, k - 1)
        return SplitLemmaResult(True, True)

    table = family_table(image, space)
    chosen = tuple(sources[v] for v in op.witness)
    parts = tuple(table.row_for(f).part for f in chosen)
    check = check_split_property(parts, limits, truncate)
    return SplitLemmaResult(check.holds, False, op.witness, chosen, parts, check)


# rank bounds


@dataclass(frozen=True)
class BoundCheck:
    name: str
    measured: int
    bound: int
    strict: bool
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.measured < self.bound if self.strict else self.measured <= self.bound

    @property
    def relation(self) -> str:
        return "<" if self.strict else "<="


@dataclass(frozen=True)
class RankBoundReport:
    k: int
    d: int
    rank: int
    ind_fanin: int
    nucleus_rank: int
    non_nucleus_rank: int
    checks: tuple[BoundCheck, ...]

    @property
    def passed(self) -> bool:
        return all(ch.passed for ch in self.checks)


def require_simple_minimal_identity(c: SPSCircuit, limits: Limits = DEFAULT_LIMITS) -> None:
    """PreconditionError with a certificate, gcd or vanishing subset attached."""
    if not c.is_homogeneous:
        raise PreconditionError("circuit is not homogeneous")
    if not is_identity(c, limits):
        raise PreconditionError(
            "not an identity (certificate attached)", detail=find_certificate(c, None, limits)
        )
    gcd, _ = gcd_and_simple(c)
    if gcd.degree:
        raise PreconditionError("circuit is not simple", detail=gcd)
    subset = vanishing_subset(c, limits)
    if subset is not None:
        raise PreconditionError(
            f"vanishing proper subset {{{', '.join(str(i + 1) for i in subset)}}}",
            detail=subset,
        )


def verify_rank_bounds(
    c: SPSCircuit,
    nucleus: NucleusReport | None = None,
    limits: Limits = DEFAULT_LIMITS,
) -> RankBoundReport:
    require_simple_minimal_identity(c, limits)
    fs = c.field
    k, d = c.fanin, c.degree
    big_field = fs.size is None or fs.size > d
    if nucleus is None:
        nucleus = build_nucleus(c, None, limits)
    space = nucleus.k_space
    rank = circuit_rank(c)
    k_ind = ind_fanin(c, limits)
    outside = quotient_rank(c.forms(), space)

    checks = [
        BoundCheck("main", rank, rank_bound(k, max(d, 1), fs).value, True),
        BoundCheck("nucleus", space.rank, 2 * k * k, True),
    ]
    if big_field:
        checks.append(
            BoundCheck(
                "final",
                rank,
                2 * k * k + (k - k_ind) * sg_bound(k_ind, d, fs),
                False,
                f"ind-fanin {k_ind}",
            )
        )
        if k_ind == k - 1:
            checks.append(
                BoundCheck("strongly-minimal", outside, sg_bound(k - 1, d, fs), False)
            )
        else:
            for part in decompose_strongly_minimal(c, nucleus.indep or None, limits):
                _, sim = gcd_and_simple(part.circuit)
                checks.append(
                    BoundCheck(
                        f"D_{part.index + 1}",
                        quotient_rank(sim.forms(), space),
                        sg_bound(k_ind, d, fs),
                        False,
                        f"fan-in {sim.fanin}",
                    )
                )
    else:
        logger.info("%s has at most d=%d elements; SG bounds skipped", fs, d)

    for ch in checks:
        if not ch.passed:
            logger.warning("bound %s failed: %d %s %d", ch.name, ch.measured, ch.relation, ch.bound)
    return RankBoundReport(k, d, rank, k_ind, space.rank, outside, tuple(checks))
