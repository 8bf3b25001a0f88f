from __future__ import annotations

import json
from io import StringIO

import pytest
from rich.console import Console

from spslab.fields import RATIONAL
from spslab.formatting import (
    SCHEMA,
    BenchRow,
    MethodResult,
    bench_json,
    check_json,
    format_basis,
    format_bench_table,
    format_bounds_table,
    format_certificate,
    format_check_table,
    format_nucleus,
    format_sg,
    hitting_set_json,
    load_schema,
    nucleus_json,
    sg_json,
    term_json,
)
from spslab.nucleus import build_nucleus
from spslab.paths import find_certificate
from spslab.pit import hitting_set
from spslab.sg import gen_line_config, gen_skew_lines, is_sg_closed, sg_growth_check
from spslab.structure import verify_rank_bounds

Q = RATIONAL


def _render(renderable) -> str:
    buf = StringIO()
    Console(file=buf, width=120, force_terminal=True).print(renderable)
    return buf.getvalue()


@pytest.fixture(scope="module")
def schema():
    return load_schema()


@pytest.fixture()
def nonzero(make_circuit):
    return make_circuit([(1, [(1, 0)]), (-2, [(1, 1)]), (1, [(1, 3)])])


def _assert_keys(schema, kind, payload):
    report = schema["reports"][kind]
    allowed = set(schema["common"]) | set(report["required"]) | set(report.get("optional", []))

    assert payload["schema"] == SCHEMA
    assert payload["kind"] == kind
    assert set(report["required"]) <= payload.keys()
    assert payload.keys() <= allowed


class TestSchema:
    def test_tag(self, schema):
        assert schema["schema"] == SCHEMA == "sps-lab/1"


class TestCheckReport:
    def test_certificate_is_one_based(self, schema, nonzero):
        cert = find_certificate(nonzero)
        results = [MethodResult("path", "NONZERO", cert)]
        payload = json.loads(check_json(Q, results, True))

        _assert_keys(schema, "check", payload)
        entry = payload["methods"][0]
        assert set(schema["reports"]["check"]["certificate"]) <= entry["certificate"].keys()
        assert entry["certificate"]["survivor"] == cert.survivor + 1
        assert all(step["term"] >= 1 for step in entry["certificate"]["path"])

    def test_random_fields(self, schema):
        results = [MethodResult("random", "PROBABLY_ZERO", trials=5, error_bound="2/101")]
        payload = json.loads(check_json(Q, results, True))

        assert payload["methods"][0] == {
            "method": "random",
            "verdict": "PROBABLY_ZERO",
            "trials": 5,
            "error_bound": "2/101",
        }

    def test_table(self, nonzero):
        results = [
            MethodResult("path", "NONZERO", find_certificate(nonzero)),
            MethodResult("random", "NONZERO", point=(3, 4), trials=1),
        ]
        output = _render(format_check_table(Q, results))

        assert "survivor T_" in output
        assert "point [3,4]" in output

    def test_certificate_text(self, nonzero):
        output = _render(format_certificate(Q, find_certificate(nonzero)))

        assert "Certificate:" in output
        assert "alpha =" in output


class TestNucleusReport:
    def test_json(self, schema, interp4):
        report = build_nucleus(interp4)
        bounds = verify_rank_bounds(interp4, report)
        payload = json.loads(nucleus_json(Q, report, report.alphas, bounds))

        _assert_keys(schema, "nucleus", payload)
        assert payload["stage"] == "nucleus"
        assert payload["indep"] == [1, 2, 3]
        assert set(schema["reports"]["nucleus"]["bounds"]) == payload["bounds"].keys()
        assert len(payload["k_terms"]) == 4

    def test_tables(self, interp4):
        report = build_nucleus(interp4)
        bounds = verify_rank_bounds(interp4, report)

        assert "rank" in _render(format_nucleus(Q, report, report.alphas))
        assert "main" in _render(format_bounds_table(bounds))

    def test_empty_basis(self):
        assert "{0}" in _render(format_basis(Q, ()))

    def test_term_json_multiplicity(self, make_term):
        payload = term_json(Q, make_term(-3, (1, 2), (1, 2), (0, 1)))

        assert payload == {
            "coeff": "-3",
            "forms": [
                {"form": ["1", "2"], "mult": 2},
                {"form": ["0", "1"], "mult": 1},
            ],
        }


class TestSGReport:
    def test_not_closed(self, schema):
        s = gen_skew_lines()
        result = is_sg_closed(s, 2)
        payload = json.loads(sg_json(s, 2, "closed", result))

        _assert_keys(schema, "sg", payload)
        assert payload["closed"] is False
        assert len(payload["witness"]) == 2

    def test_growth(self, schema):
        s = gen_line_config(3)
        growth = sg_growth_check(s, 2)
        payload = json.loads(sg_json(s, 2, "growth", growth=growth))

        _assert_keys(schema, "sg", payload)
        assert payload["regime"] == "below-threshold"
        assert "closed" not in payload

    def test_text(self):
        s = gen_line_config(3)
        output = _render(format_sg(s, 2, is_sg_closed(s, 2), sg_growth_check(s, 2)))

        assert "closed" in output
        assert "satisfied" in output


class TestHittingSetReport:
    def test_json(self, schema):
        payload = json.loads(hitting_set_json(hitting_set(2, 1, 2, Q)))

        _assert_keys(schema, "hitting-set", payload)
        assert payload["method"] == "grid"
        assert payload["points"][0] == [0, 0]


class TestBenchReport:
    rows = [
        BenchRow("interp-3-Q", "ZERO", {"expand": "ZERO", "path": "ZERO"}, 0.01),
        BenchRow("random-0-Q", "NONZERO", {"expand": "NONZERO", "path": "ZERO"}, 0.02),
    ]

    def test_agree(self):
        assert self.rows[0].agree
        assert not self.rows[1].agree

    def test_probably_zero_agrees_with_zero(self):
        assert BenchRow("x", "ZERO", {"expand": "ZERO", "random": "PROBABLY_ZERO"}).agree

    def test_json(self, schema):
        payload = json.loads(bench_json(self.rows))

        _assert_keys(schema, "bench", payload)
        assert payload["disagreements"] == 1
        assert set(schema["reports"]["bench"]["rows"]) == payload["rows"][0].keys()

    def test_table_groups_by_family(self):
        output = _render(format_bench_table(self.rows, ["expand", "path"]))

        assert "interp" in output
        assert "random" in output
