from __future__ import annotations

import pytest

from spslab.errors import InputError
from spslab.fields import RATIONAL, FieldSpec
from spslab.fileformat import (
    format_circuit,
    format_points,
    format_sg_config,
    parse_circuit,
    parse_sg_config,
    read_circuit,
)
from spslab.generators import gen_interpolation_identity
from spslab.linalg import make_vec
from spslab.sg import gen_skew_lines

INTERP4 = """\
field rational
nvars 2
# third finite difference
term -1: [1,0]^2
term 3: [1,1]^2
term -3: [1,2]^2
term 1: [1,3]^2
"""


class TestParseCircuit:
    def test_interp4(self):
        c = parse_circuit(INTERP4)

        assert c.field == RATIONAL
        assert c.nvars == 2
        assert c.fanin == 4
        assert c.terms[1].forms == (make_vec(RATIONAL, (1, 1)),) * 2

    def test_prime_field_reduces(self):
        c = parse_circuit("field prime 5\nnvars 1\nterm 7: [6]\n")

        assert c.field == FieldSpec.prime(5)
        assert c.terms[0].coeff == c.field.from_int(2)
        assert c.terms[0].forms == ((c.field.one,),)

    def test_fractions(self):
        c = parse_circuit("field rational\nnvars 2\nterm 1/2: [2/3,-1]\n")

        assert RATIONAL.format(c.terms[0].coeff) == "1/2"
        assert RATIONAL.format(c.terms[0].forms[0][0]) == "2/3"

    def test_constant_term(self):
        c = parse_circuit("field rational\nnvars 1\nterm 1: [1]\nterm -1:\n")

        assert c.terms[1].degree == 0

    def test_affine_forms(self):
        c = parse_circuit("field rational\nnvars 1\nterm 1: [1;1] [1]\n")

        assert c.affine
        assert c.width == 2
        assert c.terms[0].forms == (make_vec(RATIONAL, (1, 1)), make_vec(RATIONAL, (1, 0)))

    def test_comments_and_blank_lines(self):
        c = parse_circuit("\n# header\nfield rational  # Q\n\nnvars 1\nterm 1: [1]  # x\n")

        assert c.fanin == 1


class TestParseErrors:
    def test_empty(self):
        with pytest.raises(InputError, match="empty input") as exc:
            parse_circuit("")

        assert exc.value.line == 1

    def test_bad_field(self):
        with pytest.raises(InputError) as exc:
            parse_circuit("field real\nnvars 1\nterm 1: [1]\n")

        assert exc.value.line == 1

    def test_composite_modulus(self):
        with pytest.raises(InputError, match="not prime"):
            parse_circuit("field prime 6\nnvars 1\nterm 1: [1]\n")

    def test_missing_nvars(self):
        with pytest.raises(InputError, match="nvars") as exc:
            parse_circuit("field rational\nterm 1: [1]\n")

        assert exc.value.line == 2

    def test_wrong_arity_reports_column(self):
        with pytest.raises(InputError, match="expected 2") as exc:
            parse_circuit("field rational\nnvars 2\nterm 1: [1,0] [1]\n")

        assert exc.value.line == 3
        assert exc.value.column == 15

    def test_bad_coefficient_reports_column(self):
        with pytest.raises(InputError, match="not a scalar literal") as exc:
            parse_circuit("field rational\nnvars 2\nterm 1: [1,x]\n")

        assert (exc.value.line, exc.value.column) == (3, 12)

    def test_zero_coefficient(self):
        with pytest.raises(InputError, match="coefficient is zero"):
            parse_circuit("field rational\nnvars 1\nterm 0: [1]\n")

    def test_zero_form(self):
        with pytest.raises(InputError, match="zero linear form"):
            parse_circuit("field rational\nnvars 2\nterm 1: [0,0]\n")

    def test_junk_between_forms(self):
        with pytest.raises(InputError, match="unexpected"):
            parse_circuit("field rational\nnvars 1\nterm 1: [1] * [1]\n")

    def test_no_terms(self):
        with pytest.raises(InputError, match="no terms"):
            parse_circuit("field rational\nnvars 1\n")

    def test_message_carries_position(self):
        with pytest.raises(InputError, match=r"^line 3, column 1: "):
            parse_circuit("field rational\nnvars 1\nvec [1]\n")


class TestFormatCircuit:
    def test_collapses_powers(self):
        text = format_circuit(gen_interpolation_identity(4))

        assert "term -1: [1,0]^2" in text
        assert text.startswith("field rational\nnvars 2\n")

    def test_reparses_to_same_circuit(self):
        c = parse_circuit(INTERP4)

        assert parse_circuit(format_circuit(c)) == c

    def test_prime_residues(self):
        c = parse_circuit("field prime 7\nnvars 2\nterm -1: [-1,1/2]\n")

        assert "term 6: [6,4]" in format_circuit(c)

    def test_affine(self):
        c = parse_circuit("field rational\nnvars 1\nterm 1: [1;-1]\n")

        assert "[1;-1]" in format_circuit(c)

    def test_read_file(self, tmp_path):
        path = tmp_path / "c.sps"
        path.write_text(INTERP4)

        assert read_circuit(path).fanin == 4


class TestSGFormat:
    def test_skew_lines(self):
        s = gen_skew_lines()

        assert parse_sg_config(format_sg_config(s)) == s

    def test_vec_required(self):
        with pytest.raises(InputError, match="vec"):
            parse_sg_config("field rational\nnvars 2\nterm 1: [1,0]\n")

    def test_multiples_rejected(self):
        with pytest.raises(InputError, match="multiples"):
            parse_sg_config("field rational\nnvars 2\nvec [1,1]\nvec [2,2]\n")

    def test_wrong_length(self):
        with pytest.raises(InputError, match="expected 2"):
            parse_sg_config("field rational\nnvars 2\nvec [1]\n")


class TestPoints:
    def test_header_and_points(self):
        text = format_points([(0, 1), (2, 3)], "sps-lab hitting set k=2 d=1 n=2 R=12")

        assert text.splitlines() == [
            "# sps-lab hitting set k=2 d=1 n=2 R=12",
            "point [0,1]",
            "point [2,3]",
        ]
