from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings

from spslab.circuits import MultTerm, SPSCircuit
from spslab.fields import RATIONAL, FieldSpec
from spslab.linalg import make_vec

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile(
    "acceptance", max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(autouse=True)
def _isolate_config(tmp_path, monkeypatch):
    """No user config file or SPSLAB_* variable leaks into a test."""
    monkeypatch.setenv("HOME", str(tmp_path))
    for key in list(os.environ):
        if key.startswith("SPSLAB_"):
            monkeypatch.delenv(key)


def _make_term(coeff: object, *forms, fs: FieldSpec = RATIONAL) -> MultTerm:
    return MultTerm(fs.convert(coeff), tuple(make_vec(fs, f) for f in forms))


def _make_circuit(terms, *, fs: FieldSpec = RATIONAL, nvars: int | None = None) -> SPSCircuit:
    """Circuit from (coeff, [form, ...]) pairs; nvars defaults to the form length."""
    built = tuple(_make_term(coeff, *forms, fs=fs) for coeff, forms in terms)
    if nvars is None:
        nvars = next(len(f) for t in built for f in t.forms)
    return SPSCircuit(fs, nvars, built)


@pytest.fixture()
def make_term():
    """Factory fixture: make_term(coeff, form, ..., fs=RATIONAL)."""
    return _make_term


@pytest.fixture()
def make_circuit():
    """Factory fixture: make_circuit([(coeff, [form, ...]), ...], fs=RATIONAL)."""
    return _make_circuit


@pytest.fixture()
def rational() -> FieldSpec:
    return RATIONAL


@pytest.fixture(params=[RATIONAL, FieldSpec.prime(5), FieldSpec.prime(7)], ids=str)
def field(request) -> FieldSpec:
    return request.param


@pytest.fixture()
def interp3(make_circuit):
    """x - 2(x+y) + (x+2y)."""
    return make_circuit([(1, [(1, 0)]), (-2, [(1, 1)]), (1, [(1, 2)])])


@pytest.fixture()
def interp4(make_circuit):
    """-x^2 + 3(x+y)^2 - 3(x+2y)^2 + (x+3y)^2."""
    return make_circuit(
        [
            (-1, [(1, 0), (1, 0)]),
            (3, [(1, 1), (1, 1)]),
            (-3, [(1, 2), (1, 2)]),
            (1, [(1, 3), (1, 3)]),
        ]
    )
