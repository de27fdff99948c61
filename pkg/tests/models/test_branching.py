"""Tests for branch pieces, branch maps and the coarse map."""

import dataclasses
from fractions import Fraction

import numpy as np
import pytest

from branchsys.core.exceptions import OutOfDomainError
from branchsys.models.branching import (
    AffinePiece,
    BranchingSystem,
    BranchMap,
    Evaluation,
    QuadraticPiece,
    RemainderPolicy,
    chain_rule_residual,
    compose_pieces,
    piece_from_dict,
    rational_sqrt,
    reciprocal_residual,
)
from branchsys.models.matrix import ExplicitBlockMatrix
from branchsys.models.sets import Interval

F = Fraction


def interval(lo, hi):
    return Interval(F(lo), F(hi))


@pytest.fixture
def sqrt_piece():
    """f(t) = sqrt(t) from [0, 4) onto [0, 2)."""
    return QuadraticPiece(source=interval(0, 4), target=interval(0, 2), coeff=1, vertex=0)


class TestRationalSqrt:
    def test_perfect_square_is_exact(self):
        assert rational_sqrt(F(9, 4)) == (F(3, 2), F(0))

    def test_irrational_root_has_bound(self):
        value, bound = rational_sqrt(F(2))
        assert 0 < bound < F(1, 2**39)
        assert abs(value * value - 2) < F(1, 2**37)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            rational_sqrt(F(-1))


class TestAffinePiece:
    """Tests for affine pieces."""

    def test_between_increasing(self):
        piece = AffinePiece.between(interval(0, 1), interval(F(1, 2), 1))
        assert piece.slope == F(1, 2)
        assert piece.intercept == F(1, 2)
        assert piece.is_increasing()
        assert piece.constant_derivative() == F(1, 2)

    def test_between_decreasing(self):
        piece = AffinePiece.between(interval(0, 1), interval(2, 4), increasing=False)
        assert piece.slope == -2
        assert piece.forward(np.array([0.0]))[0] == pytest.approx(4.0)
        assert piece.exact_inverse(F(4)) == 0

    def test_non_bijection_rejected(self):
        with pytest.raises(ValueError):
            AffinePiece(source=interval(0, 1), target=interval(0, F(1, 2)), slope=1)

    def test_zero_slope_rejected(self):
        with pytest.raises(ValueError):
            AffinePiece(source=interval(0, 1), target=interval(0, 1), slope=0)


class TestQuadraticPiece:
    """Tests for the square-root branches of quadratic maps."""

    def test_right_branch(self):
        # f_2 of the quadratic example: f(t) = 1 + sqrt(t), [0, 1) -> [1, 2)
        piece = QuadraticPiece(source=interval(0, 1), target=interval(1, 2), coeff=1, vertex=1)
        t = np.array([0.25])
        assert piece.forward(t)[0] == pytest.approx(1.5)
        assert piece.derivative(t)[0] == pytest.approx(1.0)
        assert piece.inverse(np.array([1.5]))[0] == pytest.approx(0.25)
        assert piece.is_increasing()
        assert piece.constant_derivative() is None
        assert piece.structural_derivative_ok()

    def test_left_branch_is_decreasing(self):
        piece = QuadraticPiece(
            source=interval(0, 1), target=interval(0, 1), coeff=1, vertex=1, orientation=-1
        )
        assert not piece.is_increasing()
        assert piece.forward(np.array([0.25]))[0] == pytest.approx(0.5)

    def test_target_on_wrong_side_rejected(self):
        with pytest.raises(ValueError):
            QuadraticPiece(source=interval(0, 1), target=interval(0, 1), coeff=1, vertex=1)

    def test_vertex_at_target_endpoint_is_allowed(self):
        piece = QuadraticPiece(source=interval(0, 1), target=interval(0, 1), coeff=1, vertex=0)
        assert piece.structural_derivative_ok()

    def test_exact_image(self, sqrt_piece):
        image, bound = sqrt_piece.image(interval(1, F(9, 4)))
        assert image == interval(1, F(3, 2))
        assert bound == 0

    def test_dict_round_trip(self, sqrt_piece):
        assert piece_from_dict(sqrt_piece.to_dict()) == sqrt_piece


class TestComposition:
    """Closed-form compositions and the chain rule."""

    def test_affine_affine(self):
        inner = AffinePiece.between(interval(0, 1), interval(0, F(1, 2)))
        outer = AffinePiece.between(interval(0, 1), interval(F(1, 2), 1))
        composed = compose_pieces(outer, inner)
        assert isinstance(composed, AffinePiece)
        assert composed.slope == F(1, 4)
        assert composed.target == interval(F(1, 2), F(3, 4))
        assert chain_rule_residual(outer, inner) <= 1e-12

    def test_quadratic_after_affine(self, sqrt_piece):
        inner = AffinePiece.between(interval(0, 1), interval(1, 4))
        composed = compose_pieces(sqrt_piece, inner)
        # sqrt(3t + 1)
        assert isinstance(composed, QuadraticPiece)
        assert composed.coeff == F(1, 3)
        assert composed.offset == F(-1, 3)
        assert composed.target == interval(1, 2)
        assert chain_rule_residual(sqrt_piece, inner, samples=1000) <= 1e-9

    def test_affine_after_quadratic(self, sqrt_piece):
        outer = AffinePiece.between(interval(0, 2), interval(0, 1))
        composed = compose_pieces(outer, sqrt_piece)
        assert composed.coeff == 4
        assert composed.target == interval(0, 1)
        assert chain_rule_residual(outer, sqrt_piece, samples=1000) <= 1e-9

    def test_irrational_endpoint_rejected(self, sqrt_piece):
        inner = AffinePiece.between(interval(0, 1), interval(0, 2))
        with pytest.raises(ValueError):
            compose_pieces(sqrt_piece, inner)

    def test_uncontained_target_rejected(self, sqrt_piece):
        inner = AffinePiece.between(interval(0, 1), interval(3, 5))
        with pytest.raises(ValueError):
            compose_pieces(sqrt_piece, inner)

    @pytest.mark.parametrize("decreasing", [False, True])
    def test_reciprocal_derivatives(self, decreasing):
        piece = QuadraticPiece(
            source=interval(0, 4),
            target=interval(-2, 0) if decreasing else interval(0, 2),
            coeff=1,
            vertex=0,
            orientation=-1 if decreasing else 1,
        )
        assert reciprocal_residual(piece) <= 1e-12


class TestBranchingSystem:
    """Tests for the coarse map and pointwise evaluation."""

    def test_doubling_coarse_map(self, doubling_system):
        assert doubling_system.eval(Evaluation.F, 0.3) == pytest.approx(0.6)
        assert doubling_system.eval("F", 0.8) == pytest.approx(0.6)
        np.testing.assert_allclose(
            doubling_system.coarse_map_array(np.array([0.3, 0.8])), [0.6, 0.6]
        )

    def test_branch_evaluations(self, doubling_system):
        assert doubling_system.eval("f", 0.5, i=2) == pytest.approx(0.75)
        assert doubling_system.eval("phi_f", 0.5, i=2) == pytest.approx(0.5)
        assert doubling_system.eval("phi_f_inv", 0.75, i=2) == pytest.approx(2.0)

    def test_branch_index_required(self, doubling_system):
        with pytest.raises(ValueError):
            doubling_system.eval("f", 0.5)

    def test_missing_branch(self, doubling_system):
        with pytest.raises(ValueError):
            doubling_system.branch(3)

    def test_point_outside_ambient(self, doubling_system):
        with pytest.raises(OutOfDomainError):
            doubling_system.coarse_map(1.0)

    def test_point_outside_branch_domain(self, counterexample_system):
        with pytest.raises(OutOfDomainError) as exc_info:
            counterexample_system.branch(1).forward(F(3, 2))
        assert exc_info.value.index == 1

    def test_remainder_policy(self, o_infinity_system):
        assert o_infinity_system.coarse_map(0.75) == pytest.approx(0.75)
        zero = dataclasses.replace(o_infinity_system, remainder_policy=RemainderPolicy.ZERO)
        assert zero.coarse_map(0.75) == 0.0
        np.testing.assert_array_equal(zero.coarse_map_array(np.array([0.75, 0.9])), [0.0, 0.0])

    def test_branches_must_be_numbered_in_order(self):
        unit = interval(0, 1)
        branch = BranchMap.from_pieces(2, [AffinePiece.between(unit, unit)], 1)
        with pytest.raises(ValueError):
            BranchingSystem(
                ambient=F(1), branches=(branch,), matrix=ExplicitBlockMatrix.of([[1]])
            )

    def test_breakpoints(self, doubling_system):
        assert doubling_system.breakpoints() == [F(0), F(1, 2), F(1)]

    def test_ranges_union(self, o_infinity_system):
        assert o_infinity_system.ranges_union(2).ae_equal(
            o_infinity_system.branch(1).range | o_infinity_system.branch(2).range
        )
        assert o_infinity_system.ranges_union().measure == F(15, 32)
