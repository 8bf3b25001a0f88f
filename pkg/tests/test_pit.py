from __future__ import annotations

import logging
import sys
from fractions import Fraction

import pytest

from spslab.config import Limits
from spslab.errors import InputError, ResourceError
from spslab.fields import RATIONAL, FieldSpec
from spslab.generators import perturb
from spslab.paths import Verdict
from spslab.pit import (
    HittingSet,
    SubprocessOracle,
    blackbox_test,
    circuit_oracle,
    hitting_set,
    rank_bound,
    schwartz_zippel_test,
)

Q = RATIONAL

ORACLE_SCRIPT = """\
import sys
from fractions import Fraction
for line in sys.stdin:
    a, b = map(Fraction, line.split())
    print(a * a + a * b, flush=True)
"""


@pytest.fixture()
def x2_plus_xy(make_circuit):
    return make_circuit([(1, [(1, 0), (1, 1)])])


class TestRankBound:
    @pytest.mark.parametrize(
        ("k", "d", "fs", "expected"),
        [
            (2, 1, Q, 12),
            (2, 9, Q, 12),
            (3, 4, FieldSpec.prime(2), 81),
            (2, 1, FieldSpec.prime(3), 12),
        ],
    )
    def test_values(self, k, d, fs, expected):
        assert rank_bound(k, d, fs).value == expected

    def test_fan_in_one_rejected(self):
        with pytest.raises(InputError):
            rank_bound(1, 2, Q)


class TestHittingSet:
    def test_grid_when_rank_covers_n(self):
        h = hitting_set(2, 2, 2, Q)

        assert h.method == "grid"
        assert h.size == 9
        assert h.rank_bound == 12

    def test_condenser(self):
        h = hitting_set(2, 1, 3, Q, rank_override=0)

        assert h.method == "condenser"
        assert h.alphas == tuple(range(1, 8))
        assert h.size == 8
        assert (2, 4, 8) in h.points

    def test_condenser_for_single_terms(self, make_circuit):
        h = hitting_set(1, 2, 3, Q)

        assert h.method == "condenser"
        assert h.rank_bound == 0
        assert h.alphas == tuple(range(1, 14))
        assert h.size == 27
        c = make_circuit([(1, [(1, -1, 0), (0, 1, -1)])])
        assert blackbox_test(circuit_oracle(c), h).verdict is Verdict.NONZERO

    def test_condenser_once_n_exceeds_the_rank_bound(self):
        # R = 12 for k = 2 over Q, so n = 14 leaves the grid regime
        with pytest.raises(ResourceError, match="hitting-set condenser") as exc:
            hitting_set(2, 1, 14, Q)

        assert exc.value.required == 365 * 2**13

    def test_condenser_needs_large_field(self):
        with pytest.raises(InputError, match="condenser"):
            hitting_set(2, 1, 3, FieldSpec.prime(5), rank_override=0)

    def test_grid_needs_d_plus_one_values(self):
        with pytest.raises(InputError):
            hitting_set(2, 3, 2, FieldSpec.prime(3))

    def test_point_cap(self):
        with pytest.raises(ResourceError) as exc:
            hitting_set(2, 2, 2, Q, Limits(max_points=5))

        assert exc.value.cap == "max_points"

    def test_header(self):
        assert hitting_set(2, 1, 2, Q).header() == "sps-lab hitting set k=2 d=1 n=2 R=12"


class TestBlackbox:
    def test_nonzero(self, x2_plus_xy):
        outcome = blackbox_test(circuit_oracle(x2_plus_xy), hitting_set(2, 2, 2, Q))

        assert outcome.verdict is Verdict.NONZERO
        assert outcome.point == (1, 0)
        assert outcome.trials == 4

    def test_identity(self, interp4):
        outcome = blackbox_test(circuit_oracle(interp4), hitting_set(4, 2, 2, Q))

        assert outcome.verdict is Verdict.ZERO
        assert outcome.trials == 9

    def test_condenser_catches_linear_form(self, make_circuit):
        c = make_circuit([(1, [(1, -1, 0)])])
        outcome = blackbox_test(circuit_oracle(c), hitting_set(2, 1, 3, Q, rank_override=0))

        assert outcome.verdict is Verdict.NONZERO

    def test_empty_set_warns(self, caplog):
        h = HittingSet((), 1, 0, 1, Q, 0, (), "grid", 0)

        with caplog.at_level(logging.WARNING, logger="spslab.pit"):
            outcome = blackbox_test(lambda point: 0, h)

        assert outcome.verdict is Verdict.ZERO
        assert "vacuous" in caplog.text


class TestSchwartzZippel:
    def test_identity(self, interp4):
        outcome = schwartz_zippel_test(interp4, 5, seed=1)

        assert outcome.verdict is Verdict.PROBABLY_ZERO
        assert outcome.trials == 5
        assert outcome.error_bound == Fraction(2, 101)

    def test_nonzero(self, interp4):
        outcome = schwartz_zippel_test(perturb(interp4, 3, 2), 20, seed=1)

        assert outcome.verdict is Verdict.NONZERO
        assert outcome.point is not None

    def test_prime_field_bound(self, make_circuit):
        c = make_circuit([(1, [(1, 0), (0, 1)])], fs=FieldSpec.prime(7))

        assert schwartz_zippel_test(c, 10, seed=0).error_bound == Fraction(2, 7)

    def test_needs_trials(self, interp4):
        with pytest.raises(InputError):
            schwartz_zippel_test(interp4, 0, seed=0)


class TestSubprocessOracle:
    def test_evaluates_over_pipe(self):
        with SubprocessOracle([sys.executable, "-c", ORACLE_SCRIPT], Q) as oracle:
            outcome = blackbox_test(oracle, hitting_set(2, 2, 2, Q))

        assert outcome.verdict is Verdict.NONZERO
        assert outcome.point == (1, 0)

    def test_missing_command(self):
        oracle = SubprocessOracle(["/nonexistent/oracle"], Q)

        with pytest.raises(InputError, match="could not start"):
            oracle((0,))

    def test_empty_command(self):
        with pytest.raises(InputError):
            SubprocessOracle([], Q)
