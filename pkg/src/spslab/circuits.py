"""Multiplication terms and ΣΠΣ circuits."""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

from sympy.polys.rings import PolyElement, PolyRing

from spslab.config import DEFAULT_LIMITS, Limits
from spslab.errors import InputError, PreconditionError, check_cap
from spslab.fields import FieldSpec, Scalar
from spslab.linalg import (
    FormVec,
    Subspace,
    dot,
    is_zero,
    normalize,
    nullspace,
    rank_of,
    ratio,
    solve_combination,
)

logger = logging.getLogger(__name__)

Monomial = tuple[int, ...]
Poly = Mapping[Monomial, Scalar]


@dataclass(frozen=True)
class MultTerm:
    """c * prod(forms). An empty form list is the constant c."""

    coeff: Scalar
    forms: tuple[FormVec, ...] = ()

    def __post_init__(self) -> None:
        if not self.coeff:
            raise InputError("multiplication term with zero coefficient")
        if any(is_zero(f) for f in self.forms):
            raise InputError("multiplication term with a zero form")

    @property
    def degree(self) -> int:
        return len(self.forms)

    def classes(self) -> Counter[FormVec]:
        """Multiset of normalized forms; equal iff the terms are similar."""
        return Counter(normalize(f) for f in self.forms)

    def similar_to(self, other: MultTerm) -> bool:
        return self.classes() == other.classes()

    def monic(self) -> MultTerm:
        return MultTerm(_one_like(self.coeff), self.forms)

    def times(self, other: MultTerm) -> MultTerm:
        return MultTerm(self.coeff * other.coeff, self.forms + other.forms)

    def scaled(self, c: Scalar) -> MultTerm:
        return MultTerm(self.coeff * c, self.forms)


def _one_like(a: Scalar) -> Scalar:
    return a / a


@dataclass(frozen=True)
class SPSCircuit:
    """C = T_1 + ... + T_k over `field` in `nvars` variables.

    With `affine=True` every form carries one extra trailing slot holding its
    constant term; homogenize() turns that slot into a variable.
    """

    field: FieldSpec
    nvars: int
    terms: tuple[MultTerm, ...]
    affine: bool = False

    def __post_init__(self) -> None:
        if self.nvars < 1:
            raise InputError("a circuit needs at least one variable")
        if not self.terms:
            raise InputError("a circuit needs at least one term")
        width = self.width
        for i, t in enumerate(self.terms):
            for f in t.forms:
                if len(f) != width:
                    raise InputError(
                        f"term {i + 1}: form of length {len(f)}, expected {width}"
                    )

    @property
    def width(self) -> int:
        return self.nvars + 1 if self.affine else self.nvars

    @property
    def fanin(self) -> int:
        return len(self.terms)

    @property
    def degree(self) -> int:
        return max(t.degree for t in self.terms)

    @property
    def is_homogeneous(self) -> bool:
        return not self.affine and len({t.degree for t in self.terms}) == 1

    def forms(self) -> list[FormVec]:
        """L(C): every form of every term, in order."""
        return [f for t in self.terms for f in t.forms]

    def sub(self, indices: Iterable[int]) -> SPSCircuit:
        """The sub-circuit C_S."""
        return SPSCircuit(
            self.field, self.nvars, tuple(self.terms[i] for i in indices), self.affine
        )

    def with_terms(self, terms: Sequence[MultTerm]) -> SPSCircuit:
        return SPSCircuit(self.field, self.nvars, tuple(terms), self.affine)


@dataclass(frozen=True)
class CircuitProfile:
    is_zero: bool
    is_simple: bool
    rank: int
    degree: int
    fanin: int
    nvars: int
    is_minimal: bool | None = None
    ind_fanin: int | None = None


def check_caps(c: SPSCircuit, limits: Limits = DEFAULT_LIMITS) -> None:
    check_cap("max_terms", c.fanin, limits.max_terms, "circuit fan-in")
    check_cap("max_degree", c.degree, limits.max_degree, "circuit degree")
    check_cap("max_vars", c.width, limits.max_vars, "variable count")


# polynomials


@lru_cache(maxsize=64)
def poly_ring(fs: FieldSpec, nvars: int) -> PolyRing:
    names = ",".join(f"x{i + 1}" for i in range(nvars))
    return PolyRing(names, fs.domain)


def form_poly(ring: PolyRing, form: FormVec) -> PolyElement:
    n = ring.ngens
    return ring.from_dict(
        {tuple(int(j == i) for j in range(n)): c for i, c in enumerate(form) if c}
    )


def term_poly(
    ring: PolyRing, term: MultTerm, limits: Limits = DEFAULT_LIMITS
) -> PolyElement:
    p = ring.ground_new(term.coeff)
    for f in term.forms:
        p = p * form_poly(ring, f)
        check_cap("max_monomials", len(p), limits.max_monomials, "term expansion")
    return p


def circuit_poly(c: SPSCircuit, limits: Limits = DEFAULT_LIMITS) -> PolyElement:
    ring = poly_ring(c.field, c.width)
    total = ring.zero
    for t in c.terms:
        total += term_poly(ring, t, limits)
        check_cap("max_monomials", len(total), limits.max_monomials, "circuit expansion")
    return total


def expand(c: SPSCircuit, limits: Limits = DEFAULT_LIMITS) -> dict[Monomial, Scalar]:
    """Sparse monomial map of C with no zero entries; empty iff C is zero."""
    return dict(circuit_poly(c, limits).items())


def coefficient_rows(
    polys: Sequence[Poly],
) -> tuple[list[tuple[Scalar, ...]], list[Monomial], Scalar]:
    """Dense coefficient vectors of `polys` over the union of their monomials."""
    monomials = sorted({m for p in polys for m in p})
    zero = next((c - c for p in polys for c in p.values()), None)
    rows = [tuple(p.get(m, zero) for m in monomials) for p in polys]
    return rows, monomials, zero


# evaluation


def evaluate(c: SPSCircuit, point: Sequence[object]) -> Scalar:
    """sum_i coeff_i * prod_j <form_ij, point>, exactly."""
    if len(point) != c.nvars:
        raise InputError(f"point has {len(point)} coordinates, expected {c.nvars}")
    fs = c.field
    x = [fs.convert(a) for a in point]
    if c.affine:
        x.append(fs.one)
    total = fs.zero
    for t in c.terms:
        value = t.coeff
        for f in t.forms:
            value *= dot(f, x, fs.zero)
            if not value:
                break
        total += value
    return total


def homogenize(c: SPSCircuit) -> SPSCircuit:
    """Turn the constant slot into a fresh variable and pad degrees with it."""
    if c.is_homogeneous:
        return c
    fs = c.field
    d = c.degree
    nvars = c.nvars + 1
    if c.affine:
        terms = [list(t.forms) for t in c.terms]
    else:
        terms = [[(*f, fs.zero) for f in t.forms] for t in c.terms]
    pad = tuple(fs.one if i == nvars - 1 else fs.zero for i in range(nvars))
    out = []
    for t, forms in zip(c.terms, terms, strict=True):
        forms = forms + [pad] * (d - len(forms))
        out.append(MultTerm(t.coeff, tuple(forms)))
    return SPSCircuit(fs, nvars, tuple(out))


# structure


def gcd_and_simple(c: SPSCircuit) -> tuple[MultTerm, SPSCircuit]:
    """gcd(C) as a monic term and sim(C) = C / gcd(C)."""
    fs = c.field
    common = c.terms[0].classes()
    for t in c.terms[1:]:
        common &= t.classes()
    gcd_forms: list[FormVec] = []
    for f in c.terms[0].forms:
        key = normalize(f)
        if common[key] > gcd_forms.count(key):
            gcd_forms.append(key)
    gcd = MultTerm(fs.one, tuple(gcd_forms))

    sim_terms = []
    for t in c.terms:
        remaining = Counter(common)
        coeff = t.coeff
        kept: list[FormVec] = []
        for f in t.forms:
            key = normalize(f)
            if remaining[key]:
                remaining[key] -= 1
                coeff *= ratio(f, key)
            else:
                kept.append(f)
        sim_terms.append(MultTerm(coeff, tuple(kept)))
    return gcd, c.with_terms(sim_terms)


def is_simple(c: SPSCircuit) -> bool:
    return gcd_and_simple(c)[0].degree == 0


def circuit_rank(c: SPSCircuit) -> int:
    return rank_of(c.field, c.forms(), c.width)


def _term_polys(c: SPSCircuit, limits: Limits) -> list[PolyElement]:
    check_cap("max_terms", c.fanin, limits.max_terms, "circuit fan-in")
    ring = poly_ring(c.field, c.width)
    return [term_poly(ring, t, limits) for t in c.terms]


def _grid_rows(c: SPSCircuit, limits: Limits) -> list[tuple[Scalar, ...]]:
    d = c.degree
    fs = c.field
    if fs.size is not None and fs.size <= d:
        raise InputError(f"grid mode needs more than {d} field elements, {fs} has {fs.size}")
    check_cap("max_monomials", (d + 1) ** c.nvars, limits.max_monomials, "evaluation grid")
    rows = []
    for point in itertools.product(range(d + 1), repeat=c.nvars):
        rows.append(tuple(evaluate(c.sub([i]), point) for i in range(c.fanin)))
    return rows


def term_dependencies(
    c: SPSCircuit,
    mode: Literal["expand", "grid"] = "expand",
    limits: Limits = DEFAULT_LIMITS,
) -> list[tuple[Scalar, ...]]:
    """Basis of {beta : sum beta_i T_i == 0}."""
    fs = c.field
    if mode == "grid":
        constraints = _grid_rows(c, limits)
    else:
        rows, monomials, _ = coefficient_rows([dict(p.items()) for p in _term_polys(c, limits)])
        # one constraint per monomial
        constraints = [tuple(r[j] for r in rows) for j in range(len(monomials))]
    return nullspace(fs, constraints, c.fanin)


def ind_fanin(c: SPSCircuit, limits: Limits = DEFAULT_LIMITS) -> int:
    return c.fanin - len(term_dependencies(c, limits=limits))


def vanishing_subset(c: SPSCircuit, limits: Limits = DEFAULT_LIMITS) -> tuple[int, ...] | None:
    """First nonempty proper subset of terms summing to zero, by size then order."""
    k = c.fanin
    if k == 1:
        return None
    check_cap("max_subsets", 2**k, limits.max_subsets, "subset enumeration")
    polys = _term_polys(c, limits)
    ring = poly_ring(c.field, c.width)
    for size in range(1, k):
        for subset in itertools.combinations(range(k), size):
            total = ring.zero
            for i in subset:
                total += polys[i]
            if not total:
                return subset
    return None


def is_minimal(c: SPSCircuit, limits: Limits = DEFAULT_LIMITS) -> bool:
    return vanishing_subset(c, limits) is None


def is_identity(c: SPSCircuit, limits: Limits = DEFAULT_LIMITS) -> bool:
    return not circuit_poly(c, limits)


def greedy_independent(c: SPSCircuit, limits: Limits = DEFAULT_LIMITS) -> tuple[int, ...]:
    """Greedy-first maximal linearly independent set of term indices."""
    rows, monomials, _ = coefficient_rows([dict(p.items()) for p in _term_polys(c, limits)])
    kept: list[int] = []
    span = Subspace.zero(c.field, len(monomials))
    for i, row in enumerate(rows):
        if row not in span:
            kept.append(i)
            span = span.join([row])
    return tuple(kept)


@dataclass(frozen=True)
class StronglyMinimalPart:
    """D_i = sum_{j in support} alpha_j T_j + T_i, an identity."""

    index: int
    support: tuple[int, ...]
    alphas: tuple[Scalar, ...]
    circuit: SPSCircuit = field(repr=False)


def decompose_strongly_minimal(
    c: SPSCircuit,
    basis: Sequence[int] | None = None,
    limits: Limits = DEFAULT_LIMITS,
) -> list[StronglyMinimalPart]:
    """Write every term outside `basis` as a combination of the basis terms."""
    polys = [dict(p.items()) for p in _term_polys(c, limits)]
    if circuit_poly(c, limits):
        raise PreconditionError("circuit is not an identity")
    basis = tuple(greedy_independent(c, limits) if basis is None else sorted(basis))
    rows, _, _ = coefficient_rows(polys)
    basis_rows = [rows[j] for j in basis]
    if rank_of(c.field, basis_rows, len(rows[0])) != len(basis):
        raise PreconditionError(f"terms {[j + 1 for j in basis]} are not independent")

    parts = []
    for i in range(c.fanin):
        if i in basis:
            continue
        coeffs = solve_combination(c.field, basis_rows, tuple(-a for a in rows[i]))
        if coeffs is None:
            raise PreconditionError(
                f"term {i + 1} is independent of the basis; basis is not maximal"
            )
        support = tuple(j for j, a in zip(basis, coeffs, strict=True) if a)
        alphas = tuple(a for a in coeffs if a)
        terms = [c.terms[j].scaled(a) for j, a in zip(support, alphas, strict=True)]
        terms.append(c.terms[i])
        parts.append(StronglyMinimalPart(i, support, alphas, c.with_terms(terms)))
    return parts


def profile(
    c: SPSCircuit, exhaustive: bool = False, limits: Limits = DEFAULT_LIMITS
) -> CircuitProfile:
    h = homogenize(c)
    return CircuitProfile(
        is_zero=is_identity(h, limits),
        is_simple=is_simple(h),
        rank=circuit_rank(h),
        degree=h.degree,
        fanin=h.fanin,
        nvars=h.nvars,
        is_minimal=is_minimal(h, limits) if exhaustive else None,
        ind_fanin=ind_fanin(h, limits) if exhaustive else None,
    )
