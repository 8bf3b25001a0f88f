"""Ideals generated by multiplication terms.

Membership of a homogeneous polynomial h of degree d in a homogeneous ideal
<f_1..f_m> holds iff h lies in the span of {mono * f_i : deg(mono) = d - d_i},
so every test here reduces to exact linear algebra on one degree slice.
"""

from __future__ import annotations

import itertools
import json
import logging
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from dataclasses import field as dc_field

from spslab.circuits import MultTerm, Poly, form_poly, poly_ring, term_poly
from spslab.config import DEFAULT_LIMITS, Limits
from spslab.errors import InputError, PreconditionError, StructuralError, check_cap
from spslab.fields import FieldSpec, Scalar
from spslab.linalg import (
    FormVec,
    Subspace,
    Transform,
    coordinate_transform,
    dot,
    normalize,
    nullspace,
    quotient_rank,
    ratio,
)

logger = logging.getLogger(__name__)

Monomial = tuple[int, ...]


@dataclass(frozen=True)
class TermIdeal:
    """<gens> for multiplication-term generators, with cached radical span."""

    field: FieldSpec
    nvars: int
    gens: tuple[MultTerm, ...] = ()
    radspan: Subspace = dc_field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        forms = [f for g in self.gens for f in g.forms]
        object.__setattr__(self, "radspan", Subspace.span(self.field, self.nvars, forms))

    @classmethod
    def zero(cls, fs: FieldSpec, nvars: int) -> TermIdeal:
        return cls(fs, nvars)

    @property
    def is_zero(self) -> bool:
        return not self.gens

    @property
    def is_unit(self) -> bool:
        """Some generator is a nonzero constant."""
        return any(g.degree == 0 for g in self.gens)

    def extended(self, *terms: MultTerm) -> TermIdeal:
        return TermIdeal(self.field, self.nvars, self.gens + tuple(terms))


@dataclass(frozen=True)
class NodeSet:
    reps: tuple[FormVec, ...]
    nodes: tuple[MultTerm, ...]

    def __len__(self) -> int:
        return len(self.nodes)


def radspan_of(fs: FieldSpec, nvars: int, gens: Iterable[MultTerm]) -> Subspace:
    return Subspace.span(fs, nvars, [f for g in gens for f in g.forms])


def nodes_of(f: MultTerm, space: Subspace) -> NodeSet:
    """Split L(f) into similarity classes modulo `space`, in first-occurrence order."""
    fs = space.field
    groups: dict[FormVec, list[FormVec]] = {}
    for form in f.forms:
        groups.setdefault(space.class_key(form), []).append(form)
    reps = []
    nodes = []
    for key, forms in groups.items():
        reps.append(key if not any(key) else normalize(forms[0]))
        nodes.append(MultTerm(fs.one, tuple(forms)))
    return NodeSet(tuple(reps), tuple(nodes))


# degree slices


def monomials_of_degree(nvars: int, degree: int) -> list[Monomial]:
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        exps = [0] * nvars
        for i in combo:
            exps[i] += 1
        out.append(tuple(exps))
    return out


def _shift(poly: Mapping[Monomial, Scalar], mono: Monomial) -> dict[Monomial, Scalar]:
    return {tuple(a + b for a, b in zip(m, mono, strict=True)): c for m, c in poly.items()}


def _degree_of(poly: Mapping[Monomial, Scalar]) -> int:
    degrees = {sum(m) for m in poly}
    if len(degrees) > 1:
        raise InputError("polynomial is not homogeneous")
    return degrees.pop() if degrees else 0


class SliceSpace:
    """Degree slices of a homogeneous ideal given by expanded generators."""

    def __init__(
        self,
        fs: FieldSpec,
        nvars: int,
        gens: Sequence[Mapping[Monomial, Scalar]],
        limits: Limits = DEFAULT_LIMITS,
    ) -> None:
        self.field = fs
        self.nvars = nvars
        self.gens = [(dict(g), _degree_of(g)) for g in gens if g]
        self.limits = limits
        self._cache: dict[int, tuple[dict[Monomial, int], Subspace]] = {}

    def space(self, degree: int) -> tuple[dict[Monomial, int], Subspace]:
        if degree in self._cache:
            return self._cache[degree]
        columns = monomials_of_degree(self.nvars, degree)
        index = {m: j for j, m in enumerate(columns)}
        shifts = []
        for g, dg in self.gens:
            if dg <= degree:
                shifts.extend((g, m) for m in monomials_of_degree(self.nvars, degree - dg))
        check_cap(
            "max_slice", len(shifts) * len(columns), self.limits.max_slice, f"degree-{degree} slice"
        )
        zero = self.field.zero
        rows = []
        for g, m in shifts:
            row = [zero] * len(columns)
            for mono, c in _shift(g, m).items():
                row[index[mono]] = c
            rows.append(tuple(row))
        span = Subspace.span(self.field, len(columns), rows)
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(
                "slice %s",
                json.dumps(
                    {
                        "degree": degree,
                        "columns": [list(m) for m in columns],
                        "rows": [[self.field.format(a) for a in r] for r in rows],
                        "rank": span.rank,
                    }
                ),
            )
        self._cache[degree] = (index, span)
        return index, span

    def vector(self, poly: Mapping[Monomial, Scalar], degree: int) -> tuple[Scalar, ...]:
        index, span = self.space(degree)
        v = [self.field.zero] * span.dim
        for mono, c in poly.items():
            v[index[mono]] = c
        return tuple(v)

    def remainder(self, poly: Mapping[Monomial, Scalar], degree: int) -> tuple[Scalar, ...]:
        _, span = self.space(degree)
        return span.reduce(self.vector(poly, degree))

    def contains(self, poly: Mapping[Monomial, Scalar], degree: int | None = None) -> bool:
        if not poly:
            return True
        degree = _degree_of(poly) if degree is None else degree
        return not any(self.remainder(poly, degree))


def _expanded_gens(ideal: TermIdeal, nvars: int, forms_of, limits: Limits) -> list[Poly]:
    ring = poly_ring(ideal.field, nvars)
    return [
        dict(term_poly(ring, MultTerm(g.coeff, tuple(forms_of(f) for f in g.forms)), limits))
        for g in ideal.gens
    ]


def slice_membership(
    h: Mapping[Monomial, Scalar], ideal: TermIdeal, limits: Limits = DEFAULT_LIMITS
) -> bool:
    """h in I for homogeneous h, by degree-slice linear algebra."""
    if not h:
        return True
    if ideal.is_zero:
        return False
    if ideal.is_unit:
        return True
    gens = _expanded_gens(ideal, ideal.nvars, lambda f: f, limits)
    return SliceSpace(ideal.field, ideal.nvars, gens, limits).contains(h)


@dataclass
class _Confined:
    """The ideal after moving radsp(I) onto the first r coordinates."""

    transform: Transform
    rank: int
    slices: SliceSpace


def _confine(ideal: TermIdeal, limits: Limits) -> _Confined:
    tau = coordinate_transform(ideal.radspan)
    r = ideal.radspan.rank

    def head(f: FormVec) -> FormVec:
        image = tau.apply(f)
        if any(image[r:]):
            raise StructuralError("generator form escaped the confined coordinates")
        return image[:r]

    gens = _expanded_gens(ideal, r, head, limits) if r else []
    return _Confined(tau, r, SliceSpace(ideal.field, r, gens, limits))


def term_in_ideal(t: MultTerm, ideal: TermIdeal, limits: Limits = DEFAULT_LIMITS) -> bool:
    """T in I, dropping the forms of T outside radsp(I) first."""
    if ideal.is_zero:
        return False
    if ideal.is_unit:
        return True
    inside = [f for f in t.forms if f in ideal.radspan]
    confined = _confine(ideal, limits)
    r = confined.rank
    head = tuple(confined.transform.apply(f)[:r] for f in inside)
    b0 = dict(term_poly(poly_ring(ideal.field, r), MultTerm(ideal.field.one, head), limits))
    return confined.slices.contains(b0, len(inside))


def ideal_constraints(
    terms: Sequence[MultTerm], ideal: TermIdeal, limits: Limits = DEFAULT_LIMITS
) -> list[tuple[Scalar, ...]]:
    """Linear conditions on beta equivalent to sum beta_i terms_i in I.

    Each term is expanded after confining radsp(I) to head coordinates; every
    tail-monomial coefficient is a head polynomial that must lie in the
    matching degree slice.
    """
    fs = ideal.field
    m = len(terms)
    if not terms or ideal.is_unit:
        return []
    degrees = {t.degree for t in terms}
    if len(degrees) != 1:
        raise InputError("terms must share one degree")
    (d,) = degrees

    confined = _confine(ideal, limits)
    r = confined.rank
    ring = poly_ring(fs, ideal.nvars)
    parts: dict[Monomial, dict[int, dict[Monomial, Scalar]]] = defaultdict(
        lambda: defaultdict(dict)
    )
    for i, t in enumerate(terms):
        image = MultTerm(t.coeff, tuple(confined.transform.apply(f) for f in t.forms))
        for mono, c in term_poly(ring, image, limits).items():
            parts[mono[r:]][i][mono[:r]] = c

    constraints = []
    for tail in sorted(parts):
        e = d - sum(tail)
        rems = [confined.slices.remainder(parts[tail].get(i, {}), e) for i in range(m)]
        for j in range(len(rems[0])):
            row = tuple(rem[j] for rem in rems)
            if any(row):
                constraints.append(row)
    return constraints


def combination_in_ideal(
    terms: Sequence[MultTerm],
    coeffs: Sequence[Scalar],
    ideal: TermIdeal,
    limits: Limits = DEFAULT_LIMITS,
) -> bool:
    """sum coeffs_i terms_i in I for fixed coefficients."""
    zero = ideal.field.zero
    return all(
        not dot(row, coeffs, zero) for row in ideal_constraints(terms, ideal, limits)
    )


@dataclass(frozen=True)
class ComboSolution:
    """Affine solution set witness + span(directions)."""

    witness: tuple[Scalar, ...]
    directions: tuple[tuple[Scalar, ...], ...]


def combo_in_ideal(
    terms: Sequence[MultTerm],
    fixed: int,
    ideal: TermIdeal,
    limits: Limits = DEFAULT_LIMITS,
) -> ComboSolution | None:
    """All beta with beta[fixed] = 1 and sum beta_i terms_i in I."""
    fs = ideal.field
    basis = nullspace(fs, ideal_constraints(terms, ideal, limits), len(terms))
    pick = next((v for v in basis if v[fixed]), None)
    if pick is None:
        return None
    witness = tuple(a / pick[fixed] for a in pick)
    directions = []
    for v in basis:
        if v is pick:
            continue
        c = v[fixed]
        directions.append(tuple(a - c * w for a, w in zip(v, witness, strict=True)))
    return ComboSolution(witness, tuple(directions))


def crt_check(
    ideal: TermIdeal,
    z: MultTerm,
    f: MultTerm,
    g: MultTerm,
    samples: Iterable[Mapping[Monomial, Scalar]],
    limits: Limits = DEFAULT_LIMITS,
) -> bool:
    """Test <I,zfg> = <I,z> ∩ <I,f> ∩ <I,g> on the given samples."""
    rad = ideal.radspan
    if not rad.contains_all(z.forms):
        raise PreconditionError("L(z) is not contained in radsp(I)")
    if any(form in rad for form in f.forms):
        raise PreconditionError("L(f) meets radsp(I)")
    rad_f = rad.join(f.forms)
    if any(form in rad_f for form in g.forms):
        raise PreconditionError("L(g) meets radsp(I, f)")

    product = z.times(f).times(g)
    for h in samples:
        lhs = slice_membership(h, ideal.extended(product), limits)
        rhs = all(slice_membership(h, ideal.extended(t), limits) for t in (z, f, g))
        if lhs != rhs:
            logger.warning("ideal CRT disagreement at term %s", h)
            return False
    return True


def node_reduction(
    h: Mapping[Monomial, Scalar],
    ideal: TermIdeal,
    f: MultTerm,
    limits: Limits = DEFAULT_LIMITS,
) -> MultTerm | None:
    """First node g of f mod I with h not in <I,g>, or None."""
    for node in nodes_of(f, ideal.radspan).nodes:
        if not slice_membership(h, ideal.extended(node), limits):
            return node
    if not slice_membership(h, ideal.extended(f), limits):
        raise StructuralError("h lies in every <I,g> for nodes g but not in <I,f>")
    return None


def _divide_by_form(t: MultTerm, ell: FormVec) -> MultTerm:
    """t / gcd(t, ell)."""
    for i, form in enumerate(t.forms):
        c = ratio(form, ell)
        if c is not None:
            return MultTerm(t.coeff * c, t.forms[:i] + t.forms[i + 1 :])
    return t


def cancel_check(
    ell: FormVec,
    f: Mapping[Monomial, Scalar],
    gens: Sequence[MultTerm],
    k_space: Subspace,
    limits: Limits = DEFAULT_LIMITS,
) -> bool:
    """Compare ell*f in <f_1..f_m> with f in <.., f_s / gcd(f_s, ell), ..>."""
    fs, n = k_space.field, k_space.dim
    if not gens or any(g.degree == 0 for g in gens):
        raise PreconditionError("generators must be nonconstant terms")
    leads = [g.forms[0] for g in gens]
    for i, (g, lead) in enumerate(zip(gens, leads, strict=True)):
        if not all(k_space.similar(form, lead) for form in g.forms):
            raise PreconditionError(f"f_{i + 1} is not a power of one form modulo K")
    if quotient_rank(leads, k_space) != len(leads):
        raise PreconditionError("the forms l_i are dependent modulo K")
    s = next((i for i, lead in enumerate(leads) if ell in k_space.join([lead])), None)
    if s is None:
        raise PreconditionError("ell is not in F*l_s + K for any s")

    ring = poly_ring(fs, n)
    f_poly = ring.from_dict(dict(f))
    ideal = TermIdeal(fs, n, tuple(gens))
    lhs = slice_membership(dict(form_poly(ring, ell) * f_poly), ideal, limits)
    reduced = list(gens)
    reduced[s] = _divide_by_form(gens[s], ell)
    rhs = slice_membership(dict(f_poly), TermIdeal(fs, n, tuple(reduced)), limits)
    return lhs == rhs
