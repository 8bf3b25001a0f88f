from __future__ import annotations

import pytest

from spslab.circuits import circuit_rank, expand, is_identity, is_minimal, is_simple
from spslab.errors import InputError
from spslab.fields import RATIONAL, FieldSpec
from spslab.generators import (
    build_corpus,
    gen_interpolation_identity,
    gen_lifted_identity,
    gen_random_circuit,
    perturb,
)
from spslab.linalg import make_vec

Q = RATIONAL


class TestInterpolationIdentity:
    def test_k3(self):
        c = gen_interpolation_identity(3)

        assert [t.coeff for t in c.terms] == list(make_vec(Q, (1, -2, 1)))
        assert [t.forms for t in c.terms] == [
            (make_vec(Q, (1, 0)),),
            (make_vec(Q, (1, 1)),),
            (make_vec(Q, (1, 2)),),
        ]
        assert is_identity(c)

    def test_k4_third_difference(self):
        c = gen_interpolation_identity(4)

        assert [t.coeff for t in c.terms] == list(make_vec(Q, (-1, 3, -3, 1)))
        assert expand(c) == {}

    @pytest.mark.parametrize("k", [3, 4, 5])
    def test_mod_5(self, k):
        c = gen_interpolation_identity(k, FieldSpec.prime(5))

        assert expand(c) == {}
        assert is_minimal(c)

    def test_field_too_small(self):
        with pytest.raises(InputError):
            gen_interpolation_identity(4, FieldSpec.prime(3))

    def test_k_too_small(self):
        with pytest.raises(InputError, match="k >= 3"):
            gen_interpolation_identity(2)


class TestRandomCircuit:
    def test_shape(self):
        c = gen_random_circuit(3, 2, 4, seed=1)

        assert c.fanin == 3
        assert c.nvars == 4
        assert all(t.degree == 2 for t in c.terms)

    def test_seeded(self):
        assert gen_random_circuit(2, 3, 2, seed=9) == gen_random_circuit(2, 3, 2, seed=9)

    def test_prime_field(self):
        c = gen_random_circuit(2, 2, 2, seed=3, fs=FieldSpec.prime(7))

        assert c.field == FieldSpec.prime(7)

    def test_bad_parameters(self):
        with pytest.raises(InputError):
            gen_random_circuit(0, 1, 1, seed=0)


class TestPerturb:
    def test_breaks_identity(self):
        c = gen_interpolation_identity(4)

        assert not is_identity(perturb(c, 3, 2))

    def test_original_untouched(self):
        c = gen_interpolation_identity(3)
        perturb(c, 0, 5)

        assert is_identity(c)


class TestCorpus:
    def test_labels_are_truthful(self):
        for entry in build_corpus(seed=7, random_count=0):
            assert entry.is_identity == is_identity(entry.circuit)

    def test_random_part_is_seeded(self):
        first = [e.circuit for e in build_corpus(seed=3, random_count=20)]
        second = [e.circuit for e in build_corpus(seed=3, random_count=20)]

        assert first == second

    def test_interpolation_entries_per_field(self):
        names = [e.name for e in build_corpus(seed=0, random_count=0)]

        assert "interp-5-F_5" in names
        assert "interp-5-F_7" in names
        assert "interp-3-Q" in names

    def test_at_least_six_hundred_entries(self):
        corpus = list(build_corpus(seed=0))

        assert len(corpus) >= 600
        assert {e.name.split("-", 1)[0] for e in corpus} == {"interp", "lift", "pad", "random"}


class TestLiftedIdentity:
    @pytest.mark.parametrize("fs", [Q, FieldSpec.prime(5), FieldSpec.prime(7)], ids=str)
    @pytest.mark.parametrize("k", [3, 4, 5])
    def test_still_an_identity(self, k, fs):
        c = gen_lifted_identity(k, 4, seed=k, fs=fs)

        assert c.nvars == 4
        assert is_identity(c)
        assert circuit_rank(c) == 2

    def test_padded_to_degree(self):
        c = gen_lifted_identity(3, 4, seed=1, degree=4)

        assert all(t.degree == 4 for t in c.terms)
        assert is_identity(c)
        assert not is_simple(c)

    def test_degree_below_base(self):
        with pytest.raises(InputError, match="at least 3"):
            gen_lifted_identity(5, 3, seed=0, degree=2)

    def test_needs_two_variables(self):
        with pytest.raises(InputError):
            gen_lifted_identity(3, 1, seed=0)
