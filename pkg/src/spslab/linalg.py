"""Exact linear algebra over Q and F_p.

Linear forms are plain tuples of field elements (coefficients of x_1..x_n).
Row reduction and inversion go through sympy's DomainMatrix.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from sympy.polys.matrices import DomainMatrix

from spslab.errors import InputError, PreconditionError, StructuralError
from spslab.fields import FieldSpec, Scalar

FormVec = tuple[Scalar, ...]


def zero_vec(fs: FieldSpec, n: int) -> FormVec:
    return (fs.zero,) * n


def unit_vec(fs: FieldSpec, n: int, i: int) -> FormVec:
    return tuple(fs.one if j == i else fs.zero for j in range(n))


def make_vec(fs: FieldSpec, values: Iterable[object]) -> FormVec:
    return tuple(fs.convert(v) for v in values)


def is_zero(v: FormVec) -> bool:
    return not any(v)


def add(u: FormVec, v: FormVec) -> FormVec:
    return tuple(a + b for a, b in zip(u, v, strict=True))


def sub(u: FormVec, v: FormVec) -> FormVec:
    return tuple(a - b for a, b in zip(u, v, strict=True))


def scale(c: Scalar, v: FormVec) -> FormVec:
    return tuple(c * a for a in v)


def dot(u: Sequence[Scalar], v: Sequence[Scalar], zero: Scalar) -> Scalar:
    total = zero
    for a, b in zip(u, v, strict=True):
        if a and b:
            total += a * b
    return total


def leading(v: FormVec) -> int | None:
    """Index of the first nonzero coordinate."""
    for i, a in enumerate(v):
        if a:
            return i
    return None


def normalize(v: FormVec) -> FormVec:
    """Scale so the first nonzero coefficient is 1; zero stays zero."""
    i = leading(v)
    if i is None:
        return v
    lead = v[i]
    return tuple(a / lead for a in v)


def ratio(u: FormVec, v: FormVec) -> Scalar | None:
    """c with u = c*v, or None when u is not a multiple of v (v nonzero)."""
    i = leading(v)
    if i is None:
        return None
    c = u[i] / v[i]
    if all(a == c * b for a, b in zip(u, v, strict=True)):
        return c
    return None


def _check_dims(n: int, vectors: Iterable[FormVec]) -> list[FormVec]:
    out = list(vectors)
    for v in out:
        if len(v) != n:
            raise InputError(f"dimension mismatch: expected {n}, got {len(v)}")
    return out


def _rref(fs: FieldSpec, rows: list[FormVec], ncols: int) -> tuple[list[FormVec], tuple[int, ...]]:
    if not rows or ncols == 0:
        return [], ()
    dm = DomainMatrix([list(r) for r in rows], (len(rows), ncols), fs.domain)
    reduced, pivots = dm.rref()
    rows_out = [tuple(r) for r in reduced.to_list()[: len(pivots)]]
    return rows_out, tuple(pivots)


@dataclass(frozen=True)
class Subspace:
    """A subspace of F^dim kept as a reduced row echelon basis."""

    field: FieldSpec
    dim: int
    basis: tuple[FormVec, ...] = ()
    pivots: tuple[int, ...] = ()

    @classmethod
    def span(cls, fs: FieldSpec, dim: int, vectors: Iterable[FormVec]) -> Subspace:
        rows = [v for v in _check_dims(dim, vectors) if any(v)]
        basis, pivots = _rref(fs, rows, dim)
        return cls(fs, dim, tuple(basis), pivots)

    @classmethod
    def zero(cls, fs: FieldSpec, dim: int) -> Subspace:
        return cls(fs, dim)

    @property
    def rank(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return self.rank

    def reduce(self, v: FormVec) -> FormVec:
        """Canonical remainder of v: zero in every pivot column."""
        _check_dims(self.dim, [v])
        for row, p in zip(self.basis, self.pivots, strict=True):
            c = v[p]
            if c:
                v = tuple(a - c * b for a, b in zip(v, row, strict=True))
        return v

    def coordinates(self, v: FormVec) -> tuple[Scalar, ...] | None:
        """Coefficients over the echelon basis, or None if v is outside."""
        if any(self.reduce(v)):
            return None
        return tuple(v[p] for p in self.pivots)

    def __contains__(self, v: object) -> bool:
        return not any(self.reduce(v))  # type: ignore[arg-type]

    def contains_all(self, vectors: Iterable[FormVec]) -> bool:
        return all(v in self for v in vectors)

    def join(self, other: Subspace | Iterable[FormVec]) -> Subspace:
        extra = other.basis if isinstance(other, Subspace) else tuple(other)
        if not extra:
            return self
        return Subspace.span(self.field, self.dim, self.basis + tuple(extra))

    def class_key(self, v: FormVec) -> FormVec:
        """Key of the similarity class of v modulo this subspace.

        Forms inside the subspace map to the zero vector.
        """
        return normalize(self.reduce(v))

    def similar(self, u: FormVec, v: FormVec) -> bool:
        """u in F* v + self, with both outside the subspace."""
        ru, rv = self.reduce(u), self.reduce(v)
        if not any(ru) or not any(rv):
            return False
        return ratio(ru, rv) is not None

    def scale_mod(self, u: FormVec, v: FormVec) -> Scalar | None:
        """c with u - c*v in the subspace, for v outside it."""
        return ratio(self.reduce(u), self.reduce(v))


# operations


def rank_of(fs: FieldSpec, vectors: Sequence[FormVec], n: int | None = None) -> int:
    """Dimension of the span; 0 for empty or all-zero input."""
    vectors = list(vectors)
    if not vectors:
        return 0
    dim = len(vectors[0]) if n is None else n
    rows = [v for v in _check_dims(dim, vectors) if any(v)]
    if not rows:
        return 0
    return len(_rref(fs, rows, dim)[1])


def in_span(v: FormVec, space: Subspace) -> tuple[Scalar, ...] | None:
    return space.coordinates(v)


def quotient_rank(vectors: Sequence[FormVec], space: Subspace) -> int:
    """Rank of `vectors` viewed in F^n / space."""
    vectors = _check_dims(space.dim, vectors)
    return space.join(vectors).rank - space.rank


def solve_combination(
    fs: FieldSpec, vectors: Sequence[FormVec], target: FormVec
) -> tuple[Scalar, ...] | None:
    """Coefficients c with sum c_j * vectors_j == target, free ones set to 0."""
    m = len(vectors)
    n = len(target)
    _check_dims(n, vectors)
    if m == 0:
        return () if not any(target) else None
    rows = [[vectors[j][i] for j in range(m)] + [target[i]] for i in range(n)]
    reduced, pivots = DomainMatrix(rows, (n, m + 1), fs.domain).rref()
    if m in pivots:
        return None
    coeffs = [fs.zero] * m
    table = reduced.to_list()
    for r, p in enumerate(pivots):
        coeffs[p] = table[r][m]
    return tuple(coeffs)


def nullspace(fs: FieldSpec, rows: Sequence[Sequence[Scalar]], ncols: int) -> list[FormVec]:
    """Basis of {x : A x = 0}, one vector per free column, deterministic."""
    rows = [tuple(r) for r in rows if any(r)]
    if not rows:
        return [unit_vec(fs, ncols, j) for j in range(ncols)]
    reduced, pivots = _rref(fs, rows, ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        x = [fs.zero] * ncols
        x[free] = fs.one
        for row, p in zip(reduced, pivots, strict=True):
            x[p] = -row[free]
        basis.append(tuple(x))
    return basis


def complete_basis(space: Subspace, extra: FormVec | None = None) -> list[FormVec]:
    """Vectors completing space's basis to F^n, unit vectors first, `extra` last."""
    fs, n = space.field, space.dim
    current = space if extra is None else space.join([extra])
    added: list[FormVec] = []
    for j in range(n):
        if current.rank == n:
            break
        e = unit_vec(fs, n, j)
        if e not in current:
            added.append(e)
            current = current.join([e])
    if extra is not None:
        added.append(extra)
    return added


@dataclass(frozen=True)
class Transform:
    """An invertible change of coordinates acting on linear forms by l -> l * matrix."""

    field: FieldSpec
    matrix: DomainMatrix
    inverse: DomainMatrix

    def __post_init__(self) -> None:
        # matmul and == on DomainMatrix both require one storage format
        object.__setattr__(self, "matrix", self.matrix.to_dense())
        object.__setattr__(self, "inverse", self.inverse.to_dense())
        n = self.matrix.shape[0]
        eye = DomainMatrix.eye(n, self.field.domain).to_dense()
        if self.matrix.matmul(self.inverse).to_list() != eye.to_list():
            raise StructuralError("transform matrix and inverse disagree")

    @classmethod
    def from_matrix(cls, fs: FieldSpec, matrix: DomainMatrix) -> Transform:
        if matrix.rank() != matrix.shape[0]:
            raise PreconditionError("transform matrix is singular")
        return cls(fs, matrix, matrix.inv())

    @classmethod
    def identity(cls, fs: FieldSpec, n: int) -> Transform:
        eye = DomainMatrix.eye(n, fs.domain).to_dense()
        return cls(fs, eye, eye)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def _apply(self, m: DomainMatrix, v: FormVec) -> FormVec:
        row = DomainMatrix([list(v)], (1, self.n), self.field.domain)
        return tuple(row.matmul(m).to_list()[0])

    def apply(self, v: FormVec) -> FormVec:
        return self._apply(self.matrix, v)

    def undo(self, v: FormVec) -> FormVec:
        return self._apply(self.inverse, v)

    def then(self, other: Transform) -> Transform:
        """Apply self first, then other."""
        return Transform(
            self.field,
            self.matrix.matmul(other.matrix),
            other.inverse.matmul(self.inverse),
        )


def basis_change(fs: FieldSpec, rows: Sequence[FormVec]) -> Transform:
    """The transform sending rows[i] to the i-th unit vector."""
    n = len(rows)
    b = DomainMatrix([list(r) for r in rows], (n, n), fs.domain)
    if b.rank() != n:
        raise StructuralError("basis rows are dependent")
    return Transform(fs, b.inv(), b)


def coordinate_transform(space: Subspace, extra: FormVec | None = None) -> Transform:
    """Invertible tau mapping `space` onto sp(x_1..x_r) and `extra` to x_n."""
    if extra is not None:
        _check_dims(space.dim, [extra])
        if extra in space:
            raise PreconditionError("extra form lies in the subspace")
    rows = list(space.basis) + complete_basis(space, extra)
    return basis_change(space.field, rows)


def orthogonal_decompose(
    form: FormVec, y0: FormVec, u_space: Subspace, k_space: Subspace
) -> tuple[Scalar, FormVec, FormVec]:
    """Split form = alpha*y0 + u + v with u in U and v in K."""
    fs, n = k_space.field, k_space.dim
    _check_dims(n, [form, y0])
    frame = [y0, *u_space.basis, *k_space.basis]
    if rank_of(fs, frame, n) != len(frame):
        raise StructuralError("y0, U and K are not independent")
    coeffs = solve_combination(fs, frame, form)
    if coeffs is None:
        raise StructuralError("form lies outside F*y0 + U + K")
    alpha = coeffs[0]
    u = zero_vec(fs, n)
    for c, b in zip(coeffs[1 : 1 + u_space.rank], u_space.basis, strict=True):
        u = add(u, scale(c, b))
    v = sub(sub(form, scale(alpha, y0)), u)
    return alpha, u, v
