"""Tests for the standard construction and the built-in systems."""

from fractions import Fraction

import pytest

from branchsys.core.exceptions import ZeroRowError
from branchsys.models.branching import RemainderPolicy
from branchsys.models.matrix import ExplicitBlockMatrix, FullOnesMatrix, RowSupportsMatrix
from branchsys.models.sets import Interval, IntervalUnion
from branchsys.services.constructions import (
    BUILTIN_NAMES,
    build_standard,
    builtin_system,
    example_O_infinity,
    example_quadratic,
    o_infinity_points,
)

F = Fraction


class TestBuildStandard:
    """Tests for the existence construction."""

    def test_ranges_and_domains(self, standard_system):
        assert standard_system.ambient == 4
        r1, r2 = (standard_system.branch(i).range for i in (1, 2))
        assert r1 == IntervalUnion.interval(1, 2, 4)
        assert r2 == IntervalUnion.interval(2, 3, 4)
        assert standard_system.branch(1).domain == IntervalUnion.interval(1, 3, 4)
        assert standard_system.branch(2).domain == r1

    def test_finite_rows_use_equal_lengths(self, standard_system):
        targets = [p.target for p in standard_system.branch(1).pieces]
        assert targets == [Interval(F(1), F(3, 2)), Interval(F(3, 2), F(2))]

    def test_infinite_rows_use_geometric_lengths(self):
        system = build_standard(FullOnesMatrix(ambient_row_count=2))
        targets = [p.target for p in system.branch(1).pieces]
        assert targets == [Interval(F(1), F(3, 2)), Interval(F(3, 2), F(7, 4))]

    @pytest.mark.parametrize("n_max,ambient", [(1, 2), (2, 4), (3, 4), (4, 8), (7, 8)])
    def test_ambient_is_power_of_two(self, n_max, ambient):
        system = build_standard(FullOnesMatrix(ambient_row_count=n_max))
        assert system.ambient == ambient

    def test_zero_instantiated_row(self):
        matrix = RowSupportsMatrix(ambient_row_count=2, supports={1: {1}, 2: {3}})
        with pytest.raises(ZeroRowError) as exc_info:
            build_standard(matrix, 2)
        assert exc_info.value.row == 2


class TestOInfinity:
    """The infinitely-many-branches example."""

    def test_points(self):
        a, b = o_infinity_points(3)
        assert a == [F(0), F(1, 4), F(3, 8)]
        assert b[0] == F(1, 8)

    def test_first_ranges(self):
        system = example_O_infinity(8)
        assert system.branch(1).range == IntervalUnion.interval(0, F(1, 8), 1)
        assert system.branch(2).range == IntervalUnion.interval(F(1, 8), F(1, 4), 1)
        assert system.branch(1).constant_derivative() == F(1, 8)
        assert all(b.domain == IntervalUnion.full(1) for b in system.branches)

    def test_odd_n_max(self):
        assert example_O_infinity(5).n_max == 5


class TestQuadratic:
    """The quadratic-branch example with the staircase matrix."""

    def test_domains(self, quadratic_system):
        assert quadratic_system.branch(3).domain == IntervalUnion.interval(0, 2, 8)
        assert quadratic_system.branch(5).domain == IntervalUnion.interval(0, 3, 8)
        assert quadratic_system.branch(4).range == IntervalUnion.interval(3, 4, 8)

    def test_derivative_of_second_branch(self, quadratic_system):
        # Phi_{f_2}(y) = 1 / (2 sqrt(y))
        for y in (0.04, 0.25, 0.81):
            assert quadratic_system.eval("phi_f", y, i=2) == pytest.approx(1 / (2 * y**0.5))

    def test_small_ambient_is_enlarged(self, mocker):
        mock_logger = mocker.patch("branchsys.services.constructions.logger")
        system = example_quadratic(6, ambient=3)
        assert system.ambient == 8
        mock_logger.warning.assert_called_once()

    def test_ambient_too_small_for_domains(self):
        with pytest.raises(ValueError):
            example_quadratic(6, ambient=2)


class TestBuiltinSystem:
    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_each_name_builds(self, name):
        system = builtin_system(name)
        assert system.name == name
        assert system.n_max >= 2

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            builtin_system("tent")

    def test_remainder_override(self):
        system = builtin_system("o-infinity", n_max=4, remainder="zero")
        assert system.remainder_policy is RemainderPolicy.ZERO
        assert system.n_max == 4

    def test_standard_with_matrix(self):
        system = builtin_system("standard", matrix=ExplicitBlockMatrix.of([[1, 1, 1], [1, 0, 0], [0, 1, 0]]))
        assert system.n_max == 3
        assert system.ambient == 4
