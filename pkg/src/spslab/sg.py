"""Sylvester-Gallai configurations: closure, the SG_k operator, constructions."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from spslab.config import DEFAULT_LIMITS, Limits
from spslab.errors import InputError, PreconditionError, StructuralError, check_cap
from spslab.fields import RATIONAL, FieldSpec
from spslab.linalg import FormVec, Subspace, normalize, rank_of, solve_combination

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SGConfig:
    """A finite set of nonzero vectors, no two of them multiples of each other."""

    field: FieldSpec
    vectors: tuple[FormVec, ...]

    def __post_init__(self) -> None:
        if not self.vectors:
            raise InputError("an SG configuration needs at least one vector")
        n = len(self.vectors[0])
        seen: dict[FormVec, int] = {}
        for i, v in enumerate(self.vectors):
            if len(v) != n:
                raise InputError(f"vector {i + 1} has {len(v)} coordinates, expected {n}")
            if not any(v):
                raise InputError(f"vector {i + 1} is zero")
            key = normalize(v)
            if key in seen:
                raise InputError(f"vectors {seen[key] + 1} and {i + 1} are multiples")
            seen[key] = i

    @property
    def dim(self) -> int:
        return len(self.vectors[0])

    @property
    def size(self) -> int:
        return len(self.vectors)

    @property
    def rank(self) -> int:
        return rank_of(self.field, self.vectors)

    def ordered(self) -> list[FormVec]:
        """Vectors sorted by their normalized coordinates."""

        def key(v: FormVec) -> tuple[Fraction, ...]:
            return tuple(self.field.sort_key(a) for a in normalize(v))

        return sorted(self.vectors, key=key)


@dataclass(frozen=True)
class OperatorResult:
    """Closed, or the first k independent vectors spanning no other point."""

    k: int
    witness: tuple[FormVec, ...] | None
    examined: int

    @property
    def closed(self) -> bool:
        return self.witness is None


def sg_operator(s: SGConfig, k: int, limits: Limits = DEFAULT_LIMITS) -> OperatorResult:
    if k < 2:
        raise InputError("the SG_k operator needs k >= 2")
    check_cap("max_subsets", math.comb(s.size, k), limits.max_subsets, f"{k}-subsets")
    order = s.ordered()
    examined = 0
    for combo in itertools.combinations(range(len(order)), k):
        chosen = [order[i] for i in combo]
        if rank_of(s.field, chosen) != k:
            continue
        examined += 1
        span = Subspace.span(s.field, s.dim, chosen)
        members = set(combo)
        if not any(v in span for j, v in enumerate(order) if j not in members):
            return OperatorResult(k, tuple(chosen), examined)
    return OperatorResult(k, None, examined)


def is_sg_closed(s: SGConfig, k: int, limits: Limits = DEFAULT_LIMITS) -> OperatorResult:
    """Every k independent vectors span at least one more vector of S."""
    return sg_operator(s, k, limits)


def heavy_vector(
    s: SGConfig, k: int, basis: tuple[FormVec, ...], limits: Limits = DEFAULT_LIMITS
) -> FormVec:
    """A vector of S with at least r/(k-1) nonzero coordinates in `basis`."""
    if k < 2:
        raise InputError("k must be at least 2")
    fs = s.field
    keys = {normalize(v) for v in s.vectors}
    if any(normalize(b) not in keys for b in basis):
        raise InputError("basis vectors must belong to the configuration")
    r = len(basis)
    if rank_of(fs, basis) != r or r != s.rank:
        raise InputError("basis vectors must form a basis of span(S)")

    supports: list[tuple[FormVec, frozenset[int]]] = []
    for v in s.ordered():
        coords = solve_combination(fs, basis, v)
        supports.append((v, frozenset(i for i, c in enumerate(coords) if c)))

    covered: set[int] = set()
    chosen: list[FormVec] = []
    while len(covered) < r:
        candidates = [(v, sup) for v, sup in supports if sup and not sup & covered]
        if not candidates:
            break
        v, sup = max(candidates, key=lambda item: len(item[1]))
        chosen.append(v)
        covered |= sup
        logger.debug("heavy vector step %d: support %s", len(chosen), sorted(sup))
        if len(chosen) >= k:
            raise StructuralError(
                f"greedy selection reached {len(chosen)} vectors; S is not SG_{k}-closed"
            )

    first = chosen[0]
    size = len(next(sup for v, sup in supports if v == first))
    if size * (k - 1) < r:
        raise StructuralError(f"support {size} is below r/(k-1) = {r}/{k - 1}")
    return first


# constructions


def gen_line_config(m: int, fs: FieldSpec = RATIONAL) -> SGConfig:
    """{(1, t) : t = 0..m-1}, a rank-2 SG_2-closed line for m >= 3."""
    return SGConfig(fs, tuple((fs.one, t) for t in fs.elements(m)))


def gen_skew_lines() -> SGConfig:
    """Two skew lines in Q^4 whose union is SG_3-closed."""
    rows = [(1, 1, 0, 0), (1, 1, 1, 0), (1, 1, 2, 0), (1, 0, 1, 0), (1, 0, 1, 1), (1, 0, 1, 2)]
    fs = RATIONAL
    return SGConfig(fs, tuple(tuple(fs.from_int(a) for a in row) for row in rows))


def fp_config_parts(k: int, r: int, p: int) -> tuple[SGConfig, SGConfig]:
    """(S_1, S_2) over F_p, each extended by a final coordinate 1."""
    if k < 3:
        raise InputError("the F_p construction needs k >= 3")
    if r < 1:
        raise InputError("r must be at least 1")
    fs = FieldSpec.prime(p)
    if (k - 1) % p == 0:
        raise InputError(f"p={p} divides k-1={k - 1}")
    zero, one = fs.zero, fs.one

    def padded(head: list, tail: list) -> FormVec:
        return tuple(head + tail + [one])

    s1 = [padded([one if j == i else zero for j in range(k - 1)], [zero] * r) for i in range(k - 1)]
    mean = one / fs.from_int(k - 1)
    s1.append(padded([mean] * (k - 1), [zero] * r))

    s2 = []
    for tail in itertools.product(range(p), repeat=r):
        if any(tail):
            s2.append(padded([zero] * (k - 1), [fs.from_int(a) for a in tail]))
    return SGConfig(fs, tuple(s1)), SGConfig(fs, tuple(s2))


def gen_fp_config(k: int, r: int, p: int) -> SGConfig:
    """S_1 ∪ S_2 over F_p: size k + p^r - 1, rank k + r."""
    s1, s2 = fp_config_parts(k, r, p)
    return SGConfig(s1.field, s1.vectors + s2.vectors)


# bounds


def lg_ceil(m: int) -> int:
    """ceil(log2 m) for m >= 2."""
    return (max(m, 2) - 1).bit_length()


def sg_bound(k: int, d: int, fs: FieldSpec) -> int:
    """Upper bound on SG_k(F, d): 2(k-1) over Q, 9k ceil(lg d) otherwise."""
    if fs.is_rational:
        return 2 * (k - 1)
    return 9 * k * lg_ceil(d)


@dataclass(frozen=True)
class GrowthReport:
    size: int
    rank: int
    k: int
    threshold: int
    bound: float
    regime: str
    satisfied: bool


def sg_growth_check(s: SGConfig, k: int, limits: Limits = DEFAULT_LIMITS) -> GrowthReport:
    """Compare |S| with 2^(r/9k) for an SG_k-closed S."""
    if not is_sg_closed(s, k, limits).closed:
        raise PreconditionError(f"configuration is not SG_{k}-closed")
    r = s.rank
    threshold = 9 * k
    bound = 2.0 ** (r / threshold)
    if r < threshold:
        return GrowthReport(s.size, r, k, threshold, bound, "below-threshold", True)
    satisfied = s.size**threshold >= 2**r
    return GrowthReport(s.size, r, k, threshold, bound, "checked", satisfied)
