from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Literal

from sympy import isprime
from sympy.polys.domains import GF, QQ
from sympy.polys.domains.domain import Domain

from spslab.errors import InputError

# Domain elements are sympy's ground types: PythonMPQ/mpq for QQ, residues for GF(p).
Scalar = Any

_SCALAR_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")


@dataclass(frozen=True)
class FieldSpec:
    """The base field: the rationals or a prime field F_p."""

    kind: Literal["rational", "prime"] = "rational"
    modulus: int | None = None

    def __post_init__(self) -> None:
        if self.kind == "rational":
            if self.modulus is not None:
                raise InputError("the rational field takes no modulus")
        elif self.kind == "prime":
            if self.modulus is None or self.modulus < 2 or not isprime(self.modulus):
                raise InputError(f"modulus {self.modulus} is not prime")
            if self.modulus >= 2**63:
                raise InputError("prime modulus must fit a machine word")
        else:
            raise InputError(f"unknown field kind {self.kind!r}")

    @classmethod
    def rational(cls) -> FieldSpec:
        return cls("rational")

    @classmethod
    def prime(cls, p: int) -> FieldSpec:
        return cls("prime", p)

    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"

    @property
    def size(self) -> int | None:
        """Number of elements, None for the rationals."""
        return self.modulus

    @cached_property
    def domain(self) -> Domain:
        if self.is_rational:
            return QQ
        return GF(self.modulus, symmetric=False)

    @property
    def zero(self) -> Scalar:
        return self.domain.zero

    @property
    def one(self) -> Scalar:
        return self.domain.one

    def __str__(self) -> str:
        return "Q" if self.is_rational else f"F_{self.modulus}"

    # conversions

    def from_int(self, value: int) -> Scalar:
        return self.domain(int(value))

    def from_fraction(self, num: int, den: int = 1) -> Scalar:
        if den == 0:
            raise InputError("zero denominator")
        if self.is_rational:
            return QQ(int(num), int(den))
        d = self.domain
        if int(den) % self.modulus == 0:
            raise InputError(f"denominator {den} vanishes mod {self.modulus}")
        return d(int(num)) / d(int(den))

    def convert(self, value: Any) -> Scalar:
        """Coerce ints, Fractions and foreign elements into this field."""
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, int):
            return self.from_int(value)
        if isinstance(value, Fraction):
            return self.from_fraction(value.numerator, value.denominator)
        if isinstance(value, str):
            return self.parse(value)
        return self.domain.convert(value)

    def parse(self, text: str) -> Scalar:
        """Parse an integer or `p/q` literal."""
        m = _SCALAR_RE.match(text.strip())
        if not m:
            raise InputError(f"not a scalar literal: {text!r}")
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) else 1
        return self.from_fraction(num, den)

    def residue(self, a: Scalar) -> int:
        """Least non-negative residue of an F_p element."""
        return int(self.domain.to_sympy(a)) % self.modulus

    def to_fraction(self, a: Scalar) -> Fraction:
        if self.is_rational:
            return Fraction(int(a.numerator), int(a.denominator))
        return Fraction(self.residue(a))

    def format(self, a: Scalar) -> str:
        """Canonical text: reduced `p/q`, plain integers, residues in [0, p)."""
        if not self.is_rational:
            return str(self.residue(a))
        q = self.to_fraction(a)
        return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"

    def sort_key(self, a: Scalar) -> Fraction:
        return self.to_fraction(a)

    def elements(self, count: int) -> list[Scalar]:
        """The first `count` distinct elements 0, 1, 2, ...; InputError if too few."""
        if self.modulus is not None and count > self.modulus:
            raise InputError(f"{self} has fewer than {count} elements")
        return [self.from_int(i) for i in range(count)]


RATIONAL = FieldSpec.rational()
