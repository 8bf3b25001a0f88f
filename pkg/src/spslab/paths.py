"""Paths through the terms of a circuit and certificates of non-identity.

A path (v_1..v_i) picks v_j among the nodes of T_j modulo <base, v_1..v_{j-1}>.
Each node divides its term, so modulo the path ideal C reduces to
T_{i+1} + ... + T_k. If that tail is congruent to alpha*T_{i+1} and T_{i+1}
survives, C cannot be zero.
"""

from __future__ import annotations

import enum
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

from spslab.circuits import MultTerm, SPSCircuit, check_caps, homogenize
from spslab.config import DEFAULT_LIMITS, Limits
from spslab.errors import InputError, PreconditionError, ResourceError, StructuralError
from spslab.fields import Scalar
from spslab.ideals import (
    TermIdeal,
    combination_in_ideal,
    ideal_constraints,
    nodes_of,
    term_in_ideal,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Path:
    base: TermIdeal
    nodes: tuple[MultTerm, ...] = ()
    sources: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if len(self.nodes) != len(self.sources):
            raise InputError("every path node needs a source term")

    @property
    def length(self) -> int:
        return len(self.nodes)

    def ideal(self) -> TermIdeal:
        return self.base.extended(*self.nodes)

    def is_valid(self, c: SPSCircuit) -> bool:
        """Replay the node choices against the circuit."""
        if len(set(self.sources)) != len(self.sources):
            return False
        ideal = self.base
        for node, j in zip(self.nodes, self.sources, strict=True):
            if not 0 <= j < c.fanin:
                return False
            if node not in nodes_of(c.terms[j], ideal.radspan).nodes:
                return False
            ideal = ideal.extended(node)
        return ideal.radspan.rank <= self.base.radspan.rank + self.length


@dataclass(frozen=True)
class Certificate:
    """C_{[i]'} = alpha*T_{i+1} != 0 modulo the ideal of `path`."""

    i: int
    path: Path
    alpha: Scalar

    def __post_init__(self) -> None:
        if not self.alpha:
            raise InputError("certificate scalar alpha must be nonzero")
        if self.i < 0:
            raise InputError("certificate prefix length must be non-negative")

    @property
    def survivor(self) -> int:
        """0-based index of the term that survives modulo the path."""
        return self.i


def enumerate_paths(
    c: SPSCircuit, prefix: Sequence[int], base: TermIdeal
) -> Iterator[Path]:
    """Depth-first stream of every path through the `prefix` terms."""
    prefix = tuple(prefix)
    if len(set(prefix)) != len(prefix):
        raise InputError("path prefix repeats a term")

    def walk(ideal: TermIdeal, nodes: tuple[MultTerm, ...], depth: int) -> Iterator[Path]:
        if depth == len(prefix):
            yield Path(base, nodes, prefix)
            return
        for node in nodes_of(c.terms[prefix[depth]], ideal.radspan).nodes:
            yield from walk(ideal.extended(node), (*nodes, node), depth + 1)

    yield from walk(base, (), 0)


def _tail_coeffs(c: SPSCircuit, i: int, alpha: Scalar) -> tuple[Scalar, ...]:
    fs = c.field
    return (fs.one - alpha,) + (fs.one,) * (c.fanin - i - 1)


def verify_certificate(
    c: SPSCircuit, cert: Certificate, limits: Limits = DEFAULT_LIMITS
) -> bool:
    i, path = cert.i, cert.path
    if i >= c.fanin or path.sources != tuple(range(i)):
        return False
    if path.base.field != c.field or path.base.nvars != c.width:
        return False
    if not path.is_valid(c):
        return False
    ideal = path.ideal()
    if term_in_ideal(c.terms[i], ideal, limits):
        return False
    return combination_in_ideal(c.terms[i:], _tail_coeffs(c, i, cert.alpha), ideal, limits)


def _solve_alpha(
    c: SPSCircuit, i: int, ideal: TermIdeal, limits: Limits
) -> Scalar | None:
    """alpha with sum_{j>=i} T_j - alpha*T_i in the ideal, if unique and nonzero."""
    fs = c.field
    if term_in_ideal(c.terms[i], ideal, limits):
        return None
    # rows r: r[0]*(1 - alpha) + sum(r[1:]) = 0
    a = None
    for row in ideal_constraints(c.terms[i:], ideal, limits):
        rest = sum(row[1:], fs.zero)
        if row[0]:
            value = -rest / row[0]
            if a is not None and value != a:
                return None
            a = value
        elif rest:
            return None
    if a is None:
        raise StructuralError(f"term {i + 1} is outside the ideal but unconstrained")
    alpha = fs.one - a
    return alpha or None


def find_certificate(
    c: SPSCircuit, base: TermIdeal | None = None, limits: Limits = DEFAULT_LIMITS
) -> Certificate | None:
    """First certificate in (prefix length, path order); None means no path works."""
    if not c.is_homogeneous:
        raise PreconditionError("certificate search needs a homogeneous circuit")
    check_caps(c, limits)
    base = TermIdeal.zero(c.field, c.width) if base is None else base
    examined = 0
    for i in range(c.fanin):
        for path in enumerate_paths(c, range(i), base):
            examined += 1
            if examined > limits.max_paths:
                raise ResourceError(
                    f"certificate search examined more than max_paths={limits.max_paths} paths",
                    cap="max_paths",
                    required=examined,
                    progress={"prefix": i, "paths": examined - 1},
                )
            alpha = _solve_alpha(c, i, path.ideal(), limits)
            if alpha is None:
                continue
            cert = Certificate(i, path, alpha)
            if not verify_certificate(c, cert, limits):
                raise StructuralError(f"certificate at prefix {i} failed its own check")
            logger.debug("certificate at prefix %d after %d paths", i, examined)
            return cert
    logger.debug("no certificate among %d paths", examined)
    return None


class Verdict(enum.StrEnum):
    ZERO = "ZERO"
    NONZERO = "NONZERO"
    PROBABLY_ZERO = "PROBABLY_ZERO"


@dataclass(frozen=True)
class PathTestResult:
    verdict: Verdict
    circuit: SPSCircuit
    certificate: Certificate | None = None


def path_identity_test(c: SPSCircuit, limits: Limits = DEFAULT_LIMITS) -> PathTestResult:
    """ZERO or NONZERO with a certificate, on the homogenized circuit."""
    h = homogenize(c)
    cert = find_certificate(h, None, limits)
    if cert is None:
        return PathTestResult(Verdict.ZERO, h)
    return PathTestResult(Verdict.NONZERO, h, cert)
