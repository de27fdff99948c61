"""Tests for the six-condition validator and the range-cover shortcut."""

from fractions import Fraction

import pytest

from branchsys.models.branching import AffinePiece, BranchingSystem, BranchMap
from branchsys.models.matrix import ExplicitBlockMatrix, FullOnesMatrix
from branchsys.models.sets import Interval
from branchsys.services.constructions import example_quadratic
from branchsys.services.validation import lemma_check, validate

F = Fraction


class TestValidate:
    """Tests for validate()."""

    @pytest.mark.parametrize(
        "fixture",
        ["doubling_system", "standard_system", "o_infinity_system", "quadratic_system"],
    )
    def test_builtin_systems_pass(self, fixture, request):
        report = validate(request.getfixturevalue(fixture))
        assert report.passed, report.failed_conditions()
        assert [c.condition for c in report.conditions] == [1, 2, 3, 4, 5, 6]

    def test_counterexample_fails_condition_4(self, counterexample_system):
        report = validate(counterexample_system)
        assert not report.passed
        assert 4 in report.failed_conditions()
        first = report.condition(4).findings[0]
        assert first.pair == [1, 2]
        assert first.measure == "1"

    def test_counterexample_keeps_structural_conditions(self, counterexample_system):
        report = validate(counterexample_system)
        for number in (1, 2, 3, 6):
            assert report.condition(number).passed

    def test_overlapping_ranges_fail_condition_3(self):
        unit = Interval(F(0), F(1))
        half = Interval(F(0), F(1, 2))
        branches = (
            BranchMap.from_pieces(1, [AffinePiece.between(unit, half)], 1),
            BranchMap.from_pieces(2, [AffinePiece.between(unit, Interval(F(1, 4), F(3, 4)))], 1),
        )
        system = BranchingSystem(
            ambient=F(1), branches=branches, matrix=ExplicitBlockMatrix.of([[1, 1], [1, 1]])
        )
        report = validate(system)
        overlap = report.condition(3)
        assert not overlap.passed
        assert overlap.findings[0].pair == [1, 2]
        assert overlap.findings[0].measure == "1/4"

    def test_full_ones_pairs_are_vacuous_when_v_is_empty(self, o_infinity_system):
        pairs = [(frozenset({1}), frozenset())]
        report = validate(o_infinity_system, uv_pairs=pairs)
        assert report.vacuous_pairs == ["U={1} V={}"]
        assert report.condition(5).passed

    def test_truncated_pairs_are_listed(self, quadratic_system):
        pairs = [(frozenset({7}), frozenset())]
        report = validate(quadratic_system, uv_pairs=pairs)
        assert report.truncated_pairs == ["U={7} V={}"]

    def test_quadratic_on_small_requested_ambient(self):
        assert validate(example_quadratic(6, ambient=3)).passed

    def test_round_trip_residual_recorded(self, doubling_system):
        report = validate(doubling_system, grid_points_per_branch=100)
        assert report.condition(2).max_residual <= 1e-12


class TestLemmaCheck:
    """Tests for lemma_check()."""

    def test_doubling_implies_conditions_4_and_5(self, doubling_system):
        report = lemma_check(doubling_system, cover_required=True)
        assert report.ranges_disjoint
        assert report.cover is True
        assert report.implies_condition_4
        assert report.implies_condition_5
        assert report.passed

    def test_infinite_rows_are_skipped(self, o_infinity_system):
        report = lemma_check(o_infinity_system)
        assert all(r.passed is None for r in report.rows)
        assert "infinitely many" in report.rows[0].skipped_reason
        assert not report.implies_condition_4
        assert report.passed

    def test_missing_cover(self, o_infinity_system):
        report = lemma_check(o_infinity_system, cover_required=True)
        assert report.cover is False
        assert report.uncovered_measure == "17/32"
        assert not report.implies_condition_5
        assert not report.passed

    def test_counterexample_rows_fail(self, counterexample_system):
        report = lemma_check(counterexample_system)
        assert [r.passed for r in report.rows] == [False, False]
        assert not report.passed

    def test_truncated_rows_are_skipped(self):
        unit = Interval(F(0), F(1))
        branches = (BranchMap.from_pieces(1, [AffinePiece.between(unit, unit)], 1),)
        matrix = ExplicitBlockMatrix.of([[1, 1], [1, 1]])
        system = BranchingSystem(ambient=F(1), branches=branches, matrix=matrix)
        report = lemma_check(system)
        assert report.rows[0].passed is None
        assert "N_max" in report.rows[0].skipped_reason

    def test_full_ones_report_shape(self):
        system = BranchingSystem(
            ambient=F(1),
            branches=(
                BranchMap.from_pieces(1, [AffinePiece.between(Interval(F(0), F(1)), Interval(F(0), F(1)))], 1),
            ),
            matrix=FullOnesMatrix(ambient_row_count=1),
        )
        report = lemma_check(system, cover_required=True)
        assert report.cover is True
        assert report.rows[0].passed is None
