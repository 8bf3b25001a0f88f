"""Circuit families for tests, benchmarks and `sps gen`."""

from __future__ import annotations

import random
from collections.abc import Iterator
from dataclasses import dataclass

from spslab.circuits import MultTerm, SPSCircuit
from spslab.errors import InputError
from spslab.fields import RATIONAL, FieldSpec, Scalar
from spslab.linalg import nullspace, rank_of


def gen_interpolation_identity(k: int, fs: FieldSpec = RATIONAL) -> SPSCircuit:
    """sum_i lambda_i (x + a_i y)^(k-2) with a_i = 0..k-1.

    lambda spans the nullspace of the (k-1) x k Vandermonde system, scaled so
    the last entry is 1.
    """
    if k < 3:
        raise InputError("interpolation identities need k >= 3")
    points = fs.elements(k)
    vandermonde = [[a**j for a in points] for j in range(k - 1)]
    (lam,) = nullspace(fs, vandermonde, k)
    last = lam[-1]
    lam = tuple(c / last for c in lam)
    if not all(lam):
        raise InputError(f"{fs} is too small for the degree-{k - 2} interpolation identity")
    terms = tuple(
        MultTerm(c, ((fs.one, a),) * (k - 2)) for c, a in zip(lam, points, strict=True)
    )
    return SPSCircuit(fs, 2, terms)


def _random_scalar(fs: FieldSpec, rng: random.Random, bound: int, nonzero: bool) -> Scalar:
    while True:
        if fs.is_rational:
            value = fs.from_int(rng.randint(-bound, bound))
        else:
            value = fs.from_int(rng.randrange(fs.modulus))
        if value or not nonzero:
            return value


def _random_form(fs: FieldSpec, n: int, rng: random.Random, bound: int) -> tuple[Scalar, ...]:
    while True:
        form = tuple(_random_scalar(fs, rng, bound, nonzero=False) for _ in range(n))
        if any(form):
            return form


def gen_random_circuit(
    k: int, d: int, n: int, seed: int, fs: FieldSpec = RATIONAL, bound: int = 3
) -> SPSCircuit:
    """A homogeneous ΣΠΣ(k,d,n) circuit with small random coefficients."""
    if k < 1 or d < 0 or n < 1:
        raise InputError("need k >= 1, d >= 0 and n >= 1")
    rng = random.Random(seed)
    terms = tuple(
        MultTerm(
            _random_scalar(fs, rng, bound, nonzero=True),
            tuple(_random_form(fs, n, rng, bound) for _ in range(d)),
        )
        for _ in range(k)
    )
    return SPSCircuit(fs, n, terms)


def perturb(c: SPSCircuit, index: int, coeff: object) -> SPSCircuit:
    """Replace the coefficient of term `index`."""
    terms = list(c.terms)
    terms[index] = MultTerm(c.field.convert(coeff), terms[index].forms)
    return c.with_terms(terms)


def gen_lifted_identity(
    k: int, n: int, seed: int, fs: FieldSpec = RATIONAL, degree: int | None = None
) -> SPSCircuit:
    """The interpolation identity pushed into n variables.

    x and y become two independent random forms, then every term is multiplied
    by the same random forms until it reaches `degree`.
    """
    base = gen_interpolation_identity(k, fs)
    if n < 2:
        raise InputError("lifting needs n >= 2")
    if degree is not None and degree < k - 2:
        raise InputError(f"degree must be at least {k - 2}")
    rng = random.Random(seed)
    while True:
        u, w = _random_form(fs, n, rng, 3), _random_form(fs, n, rng, 3)
        if rank_of(fs, [u, w], n) == 2:
            break
    extra = 0 if degree is None else degree - (k - 2)
    shared = tuple(_random_form(fs, n, rng, 3) for _ in range(extra))

    def image(form: tuple[Scalar, ...]) -> tuple[Scalar, ...]:
        a, b = form
        return tuple(a * ui + b * wi for ui, wi in zip(u, w, strict=True))

    terms = tuple(MultTerm(t.coeff, tuple(map(image, t.forms)) + shared) for t in base.terms)
    return SPSCircuit(fs, n, terms)


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    circuit: SPSCircuit
    is_identity: bool | None = None


def build_corpus(
    seed: int,
    random_count: int = 500,
    fields: tuple[FieldSpec, ...] = (RATIONAL, FieldSpec.prime(5), FieldSpec.prime(7)),
    max_k: int = 4,
    max_d: int = 4,
    max_n: int = 4,
) -> Iterator[CorpusEntry]:
    """Generated identities with their perturbations, then seeded random circuits."""
    rng = random.Random(seed)
    for fs in fields:
        for k in (3, 4, 5):
            if fs.size is not None and fs.size < k:
                continue
            identities = [
                (f"interp-{k}-{fs}", gen_interpolation_identity(k, fs)),
                (f"lift-{k}-n3-{fs}", gen_lifted_identity(k, 3, rng.randrange(2**32), fs)),
                (f"lift-{k}-n4-{fs}", gen_lifted_identity(k, 4, rng.randrange(2**32), fs)),
                (f"pad-{k}-n4-{fs}", gen_lifted_identity(k, 4, rng.randrange(2**32), fs, 4)),
            ]
            for name, c in identities:
                yield CorpusEntry(name, c, True)
                for i in range(k):
                    bumped = c.terms[i].coeff + fs.one
                    if bumped:
                        yield CorpusEntry(f"{name}-bump{i + 1}", perturb(c, i, bumped), False)

    for j in range(random_count):
        fs = fields[j % len(fields)]
        k = rng.randint(1, max_k)
        d = rng.randint(1, max_d)
        n = rng.randint(1, max_n)
        yield CorpusEntry(
            f"random-{j}-{fs}", gen_random_circuit(k, d, n, rng.randrange(2**32), fs)
        )
