"""Matchings between terms, the mat-nucleus and nucleus of an identity.

For a subspace K, T_1 and T_i are K-matched when their forms inside K have the
same count and their forms outside K agree class by class modulo K. The
nucleus is a low-rank K matching every term to T_1 whose K-parts
K_i = M(L_K(T_i)) stay independent on an independent set of terms.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
import random
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

from sympy.polys.matrices import DomainMatrix

from spslab.circuits import (
    MultTerm,
    SPSCircuit,
    circuit_poly,
    greedy_independent,
    ind_fanin,
    is_identity,
    term_dependencies,
)
from spslab.config import DEFAULT_LIMITS, Limits
from spslab.errors import InputError, PreconditionError, StructuralError, check_cap
from spslab.fields import Scalar
from spslab.ideals import TermIdeal, nodes_of, radspan_of, term_in_ideal
from spslab.linalg import (
    FormVec,
    Subspace,
    Transform,
    basis_change,
    complete_basis,
    coordinate_transform,
    dot,
    leading,
    orthogonal_decompose,
    rank_of,
    sub,
)
from spslab.paths import find_certificate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Matching:
    """pairs[t] = (i, j) matches left[i] with right[j]; right[j] - scales[t]*left[i] in space."""

    space: Subspace
    left: tuple[FormVec, ...]
    right: tuple[FormVec, ...]
    pairs: tuple[tuple[int, int], ...]
    scales: tuple[Scalar, ...]

    def is_valid(self) -> bool:
        n = len(self.left)
        if len(self.right) != n or len(self.pairs) != n or len(self.scales) != n:
            return False
        if sorted(i for i, _ in self.pairs) != list(range(n)):
            return False
        if sorted(j for _, j in self.pairs) != list(range(n)):
            return False
        for (i, j), c in zip(self.pairs, self.scales, strict=True):
            if not c:
                return False
            shifted = tuple(c * a for a in self.left[i])
            if sub(self.right[j], shifted) not in self.space:
                return False
        return True


@dataclass(frozen=True)
class TermMatching:
    """Matchings of the L_U parts and of the L^c_U parts of two terms."""

    inside: Matching
    outside: Matching

    def is_valid(self) -> bool:
        return self.inside.is_valid() and self.outside.is_valid()


def compute_matching(g: MultTerm, h: MultTerm, space: Subspace) -> TermMatching | None:
    """Greedy class-by-class U-matching of g and h, or None when none exists."""
    fs = space.field
    g_in = tuple(f for f in g.forms if f in space)
    h_in = tuple(f for f in h.forms if f in space)
    if len(g_in) != len(h_in):
        return None
    inside = Matching(
        space, g_in, h_in, tuple((i, i) for i in range(len(g_in))), (fs.one,) * len(g_in)
    )

    g_out = tuple(f for f in g.forms if f not in space)
    h_out = tuple(f for f in h.forms if f not in space)
    if len(g_out) != len(h_out):
        return None
    buckets: dict[FormVec, list[int]] = {}
    for j, f in enumerate(h_out):
        buckets.setdefault(space.class_key(f), []).append(j)
    pairs = []
    scales = []
    for i, f in enumerate(g_out):
        bucket = buckets.get(space.class_key(f))
        if not bucket:
            return None
        j = bucket.pop(0)
        pairs.append((i, j))
        scales.append(space.scale_mod(h_out[j], f))
    outside = Matching(space, g_out, h_out, tuple(pairs), tuple(scales))
    return TermMatching(inside, outside)


def scaling_factor(m: Matching) -> Scalar:
    """sc(pi): product of the per-form scales."""
    return math.prod(m.scales, start=m.space.field.one)


def k_part(t: MultTerm, space: Subspace) -> MultTerm:
    """M(L_K(t)): the monic product of the forms of t inside `space`."""
    return MultTerm(space.field.one, tuple(f for f in t.forms if f in space))


class Stage(enum.StrEnum):
    MAT = "mat-nucleus"
    FULL = "nucleus"


@dataclass(frozen=True)
class NucleusReport:
    k_space: Subspace
    matchings: tuple[TermMatching, ...]
    k_terms: tuple[MultTerm, ...]
    alphas: tuple[Scalar, ...]
    stage: Stage
    indep: tuple[int, ...] = ()
    rounds: int = 0

    @property
    def rank(self) -> int:
        return self.k_space.rank


def _require_identity(c: SPSCircuit, limits: Limits) -> None:
    if not c.is_homogeneous:
        raise PreconditionError("nucleus construction needs a homogeneous circuit")
    if c.fanin < 2:
        raise PreconditionError("a single term is never an identity")
    if not is_identity(c, limits):
        raise PreconditionError("circuit is not an identity")


def _components(c: SPSCircuit, space: Subspace) -> list[tuple[int, ...]]:
    """Connected components of the U-matched graph, ordered by least vertex."""
    parent = list(range(c.fanin))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in itertools.combinations(range(c.fanin), 2):
        if find(a) != find(b) and compute_matching(c.terms[a], c.terms[b], space):
            parent[find(b)] = find(a)
    groups: dict[int, list[int]] = {}
    for v in range(c.fanin):
        groups.setdefault(find(v), []).append(v)
    return sorted((tuple(g) for g in groups.values()), key=lambda g: g[0])


def _matchings_from_first(c: SPSCircuit, space: Subspace) -> tuple[TermMatching, ...]:
    out = []
    for i, t in enumerate(c.terms):
        m = compute_matching(c.terms[0], t, space)
        if m is None or not m.is_valid():
            raise StructuralError(f"T_1 and T_{i + 1} are not matched by the nucleus")
        out.append(m)
    return tuple(out)


def _nucleus_alphas(
    c: SPSCircuit, space: Subspace, matchings: Sequence[TermMatching]
) -> tuple[Scalar, ...]:
    """alpha_i = coeff_i * sc(pi_i) * lead, lead taken from T_1's non-K forms."""
    tau = coordinate_transform(space)
    r = space.rank
    lead = c.field.one
    for f in matchings[0].outside.left:
        image = tau.apply(f)
        j = max(idx for idx in range(r, len(image)) if image[idx])
        lead *= image[j]
    return tuple(
        t.coeff * scaling_factor(m.outside) * lead
        for t, m in zip(c.terms, matchings, strict=True)
    )


def _report(
    c: SPSCircuit,
    space: Subspace,
    stage: Stage,
    indep: tuple[int, ...] = (),
    rounds: int = 0,
) -> NucleusReport:
    matchings = _matchings_from_first(c, space)
    return NucleusReport(
        k_space=space,
        matchings=matchings,
        k_terms=tuple(k_part(t, space) for t in c.terms),
        alphas=_nucleus_alphas(c, space, matchings),
        stage=stage,
        indep=indep,
        rounds=rounds,
    )


def build_mat_nucleus(c: SPSCircuit, limits: Limits = DEFAULT_LIMITS) -> NucleusReport:
    """Grow U from certificate paths until every pair of terms is U-matched."""
    _require_identity(c, limits)
    k = c.fanin
    space = Subspace.zero(c.field, c.width)
    components = _components(c, space)
    rounds = 0
    while len(components) > 1:
        rounds += 1
        if rounds >= k:
            raise StructuralError("mat-nucleus did not connect within k-1 rounds")
        s = components[0]
        rest = tuple(v for v in range(k) if v not in s)
        cert_s = find_certificate(c.sub(s), None, limits)
        if cert_s is None:
            raise StructuralError(f"input not a minimal identity: terms {_one_based(s)} vanish")
        cert_rest = find_certificate(c.sub(rest), cert_s.path.ideal(), limits)
        if cert_rest is None:
            raise StructuralError(
                f"input not a minimal identity: terms {_one_based(rest)} vanish modulo the path"
            )
        space = space.join(cert_rest.path.ideal().radspan)
        merged = _components(c, space)
        logger.debug(
            "mat-nucleus round %d: S=%s, rank %d, %d components",
            rounds,
            _one_based(s),
            space.rank,
            len(merged),
        )
        if len(merged) >= len(components):
            raise StructuralError(f"mat-nucleus round {rounds} merged no components")
        components = merged

    if space.rank >= k * k:
        raise StructuralError(f"mat-nucleus rank {space.rank} is not below k^2 = {k * k}")
    return _report(c, space, Stage.MAT, rounds=rounds)


def _one_based(indices: Sequence[int]) -> list[int]:
    return [i + 1 for i in indices]


def build_nucleus(
    c: SPSCircuit, indep: Sequence[int] | None = None, limits: Limits = DEFAULT_LIMITS
) -> NucleusReport:
    """Extend the mat-nucleus until the K_i of `indep` are linearly independent."""
    mat = build_mat_nucleus(c, limits)
    fs, n, k = c.field, c.width, c.fanin
    indep = tuple(greedy_independent(c, limits) if indep is None else sorted(set(indep)))
    dependent = term_dependencies(c.sub(indep), limits=limits)
    if dependent or len(indep) != ind_fanin(c, limits):
        raise PreconditionError(
            f"terms {_one_based(indep)} are not a maximal independent set", detail=indep
        )
    terms = [c.terms[i] for i in indep]
    space = mat.k_space
    rounds = 0

    def ideal_for(u: Subspace, p: int, q: int) -> TermIdeal:
        gens = [k_part(terms[s], u) for s in range(q + 1)] + terms[q + 1 : p]
        return TermIdeal(fs, n, tuple(gens))

    for p in range(1, len(terms)):
        for q in range(p):
            if not term_in_ideal(terms[p], ideal_for(space, p, q), limits):
                continue
            below = radspan_of(fs, n, [k_part(terms[s], space) for s in range(q)])
            for node in nodes_of(terms[q], below).nodes:
                grown = space.join(node.forms)
                if not term_in_ideal(terms[p], ideal_for(grown, p, q), limits):
                    space = grown
                    rounds += 1
                    logger.debug(
                        "nucleus phase %d round %d: rank %d", p + 1, q + 1, space.rank
                    )
                    break
            else:
                raise StructuralError(
                    f"no node of T_{indep[q] + 1} separates T_{indep[p] + 1} in phase {p + 1}"
                )

    if space.rank >= 2 * k * k:
        raise StructuralError(f"nucleus rank {space.rank} is not below 2k^2 = {2 * k * k}")
    report = _report(c, space, Stage.FULL, indep, mat.rounds + rounds)
    k_terms = [report.k_terms[i] for i in indep]
    if term_dependencies(SPSCircuit(fs, n, tuple(k_terms)), limits=limits):
        raise StructuralError("nucleus terms K_i are linearly dependent")
    return report


def nucleus_identity(
    c: SPSCircuit, report: NucleusReport, limits: Limits = DEFAULT_LIMITS
) -> SPSCircuit:
    """C' = sum alpha_i K_i, checked to expand to zero."""
    if len(report.matchings) != c.fanin or not all(m.is_valid() for m in report.matchings):
        raise StructuralError("nucleus report carries an invalid matching")
    terms = tuple(
        k_i.scaled(a) for k_i, a in zip(report.k_terms, report.alphas, strict=True)
    )
    out = SPSCircuit(c.field, c.width, terms)
    if circuit_poly(out, limits):
        raise StructuralError("nucleus identity does not vanish")
    return out


def verify_clm_kmin(
    report: NucleusReport, c: SPSCircuit, limits: Limits = DEFAULT_LIMITS
) -> bool:
    """K_{s_r} outside <K_{s_1}..K_{s_{r-1}}> for every subset s_1 < ... < s_r, 1 < r < k."""
    k = c.fanin
    fs, n = c.field, c.width
    total = sum(math.comb(k, r) for r in range(2, k))
    check_cap("max_subsets", total, limits.max_subsets, "K_i subsets")
    for r in range(2, k):
        for subset in itertools.combinations(range(k), r):
            *head, last = subset
            ideal = TermIdeal(fs, n, tuple(report.k_terms[s] for s in head))
            if term_in_ideal(report.k_terms[last], ideal, limits):
                logger.info("K_%d lies in the ideal of %s", last + 1, _one_based(head))
                return False
    return True


# monic frame


@dataclass(frozen=True)
class MonicFrame:
    """tau fixing K, with F^n = F*y0 + U + K and every non-K form of tau(C) monic in y0."""

    transform: Transform
    y0: FormVec
    u_space: Subspace
    k_space: Subspace

    def apply(self, c: SPSCircuit) -> SPSCircuit:
        terms = tuple(
            MultTerm(t.coeff, tuple(self.transform.apply(f) for f in t.forms)) for t in c.terms
        )
        return c.with_terms(terms)

    def y0_coefficient(self, form: FormVec) -> Scalar:
        return orthogonal_decompose(form, self.y0, self.u_space, self.k_space)[0]


def _small_values() -> Iterator[int]:
    yield 0
    for m in itertools.count(1):
        yield m
        yield -m


def _grid_points(width: int, max_points: int) -> Iterator[tuple[int, ...]]:
    """Integer vectors ordered by the largest position of a coordinate in 0, 1, -1, 2, ..."""
    values = list(itertools.islice(_small_values(), 64))
    emitted = 0
    for b in range(1, len(values) + 1):
        for idx in itertools.product(range(b), repeat=width):
            if max(idx) != b - 1:
                continue
            yield tuple(values[i] for i in idx)
            emitted += 1
            if emitted >= max_points:
                return


def make_monic(
    c: SPSCircuit,
    k_space: Subspace,
    seed: int = 0,
    grid_points: int = 4096,
    random_points: int = 1000,
) -> MonicFrame:
    fs, n = c.field, c.width
    d = c.degree
    if fs.size is not None and fs.size <= d:
        raise InputError(f"{fs} has {fs.size} elements, need more than d = {d}")
    complement = complete_basis(k_space)
    if not complement:
        raise PreconditionError("K contains every form; there is no y0 direction")
    y0, u_basis = complement[-1], complement[:-1]
    u_space = Subspace.span(fs, n, u_basis)
    head = len(complement)
    rows = [y0, *u_basis, *k_space.basis]
    to_frame = basis_change(fs, rows)

    coords = []
    seen = set()
    for f in c.forms():
        if f in k_space:
            continue
        key = k_space.class_key(f)
        if key in seen:
            continue
        seen.add(key)
        coords.append(to_frame.apply(f)[:head])

    def works(a: Sequence[Scalar]) -> bool:
        return all(dot(alpha, a, fs.zero) for alpha in coords)

    column = None
    for point in _grid_points(head, grid_points):
        a = tuple(fs.from_int(v) for v in point)
        if any(a) and works(a):
            column = a
            break
    if column is None:
        rng = random.Random(seed)
        span = fs.size if fs.size is not None else max(2 * len(coords) * max(d, 1) + 1, 100)
        for _ in range(random_points):
            a = tuple(fs.from_int(rng.randrange(span)) for _ in range(head))
            if any(a) and works(a):
                column = a
                break
    if column is None:
        raise StructuralError("no monic direction found by grid or random search")
    logger.debug("monic column %s", [fs.format(v) for v in column])

    p = leading(column)
    cols = [column] + [
        tuple(fs.one if r == m else fs.zero for r in range(head)) for m in range(head) if m != p
    ]
    full = [
        [cols[j][i] if i < head and j < head else (fs.one if i == j else fs.zero) for j in range(n)]
        for i in range(n)
    ]
    mix = Transform.from_matrix(fs, DomainMatrix(full, (n, n), fs.domain))
    from_frame = Transform(fs, to_frame.inverse, to_frame.matrix)
    tau = to_frame.then(mix).then(from_frame)

    frame = MonicFrame(tau, y0, u_space, k_space)
    for b in k_space.basis:
        if tau.apply(b) != b:
            raise StructuralError("monic transform moved a K basis vector")
    for f in c.forms():
        if f not in k_space and not frame.y0_coefficient(tau.apply(f)):
            raise StructuralError("monic transform left a form without y0")
    if rank_of(fs, [tau.apply(e) for e in rows], n) != n:
        raise StructuralError("monic transform is singular")
    return frame
