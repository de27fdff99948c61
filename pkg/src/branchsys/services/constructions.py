"""Constructors for branching systems: the standard existence construction and built-in examples."""

import dataclasses
import math
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

from branchsys.core.exceptions import ZeroRowError
from branchsys.core.logging_config import logger
from branchsys.models.branching import (
    AffinePiece,
    BranchingSystem,
    BranchMap,
    QuadraticPiece,
    RemainderPolicy,
)
from branchsys.models.matrix import (
    ExplicitBlockMatrix,
    FullOnesMatrix,
    ZeroOneMatrix,
    staircase_matrix,
)
from branchsys.models.sets import Interval, RationalLike, as_rational


def _next_power_of_two(value: Fraction) -> int:
    return 1 << max(0, math.ceil(value) - 1).bit_length()


def build_standard(matrix: ZeroOneMatrix, n_max: Optional[int] = None) -> BranchingSystem:
    """
    Place R_i = [i, i+1) and split each range according to row i of the matrix.

    Row i's instantiated ones j_1 < j_2 < ... get consecutive subintervals I_j of R_i:
    equal lengths for finite rows, lengths 1/2, 1/4, ... for infinite rows (the tail
    beyond N_max is left uncovered). The piece for j is the increasing affine map
    R_j -> I_j, so D_i is the union of the R_j with A(i, j) = 1.

    Args:
        matrix: 0-1 matrix without zero rows among the instantiated columns
        n_max: number of branches; defaults to the matrix's row count

    Returns:
        BranchingSystem on [0, L) with L the smallest power of two >= N_max + 1

    Raises:
        ZeroRowError: if some row i <= N_max has no ones among j <= N_max
    """
    n_max = matrix.ambient_row_count if n_max is None else n_max
    if n_max < 1:
        raise ValueError("n_max must be a positive integer")
    ambient = Fraction(_next_power_of_two(Fraction(n_max + 1)))

    branches: List[BranchMap] = []
    for i in range(1, n_max + 1):
        columns = matrix.instantiated_support(i, n_max)
        if not columns:
            raise ZeroRowError(i)
        if matrix.is_row_finite(i):
            lengths = [Fraction(1, len(columns))] * len(columns)
        else:
            lengths = [Fraction(1, 2**k) for k in range(1, len(columns) + 1)]

        pieces = []
        cursor = Fraction(i)
        for j, length in zip(columns, lengths):
            target = Interval(cursor, cursor + length)
            pieces.append(AffinePiece.between(Interval(Fraction(j), Fraction(j + 1)), target))
            cursor += length
        branches.append(BranchMap.from_pieces(i, pieces, ambient))

    system = BranchingSystem(ambient=ambient, branches=tuple(branches), matrix=matrix, name="standard")
    logger.info(f"Built standard system with {n_max} branches on [0, {ambient})")
    return system


def doubling() -> BranchingSystem:
    """F(x) = 2x mod 1 on [0, 1) with branches x/2 and (x+1)/2."""
    ambient = Fraction(1)
    unit = Interval(Fraction(0), Fraction(1))
    halves = (Interval(Fraction(0), Fraction(1, 2)), Interval(Fraction(1, 2), Fraction(1)))
    branches = tuple(
        BranchMap.from_pieces(i, [AffinePiece.between(unit, target)], ambient)
        for i, target in enumerate(halves, start=1)
    )
    matrix = ExplicitBlockMatrix.of([[1, 1], [1, 1]])
    return BranchingSystem(ambient=ambient, branches=branches, matrix=matrix, name="doubling")


def o_infinity_points(count: int) -> tuple:
    """(a_1..a_count, b_1..b_{count-1}) with a_1 = 0, a_i = a_{i-1} + 2^-i, b_i = (a_i + a_{i+1}) / 2."""
    a = [Fraction(0)]
    for i in range(2, count + 1):
        a.append(a[-1] + Fraction(1, 2**i))
    b = [(a[k] + a[k + 1]) / 2 for k in range(count - 1)]
    return a, b


def example_O_infinity(n_max: int) -> BranchingSystem:
    """
    Infinitely many affine branches of [0, 1) onto shrinking ranges packed into [0, 1/2).

    Odd i = 2k-1 maps onto [a_k, b_k), even i = 2k onto [b_k, a_{k+1}); every
    D_i is [0, 1) and the matrix is all ones.
    """
    if n_max < 1:
        raise ValueError("n_max must be a positive integer")
    ambient = Fraction(1)
    pairs = -(-n_max // 2)
    a, b = o_infinity_points(pairs + 1)
    unit = Interval(Fraction(0), Fraction(1))

    branches = []
    for i in range(1, n_max + 1):
        k = (i + 1) // 2 - 1
        target = Interval(a[k], b[k]) if i % 2 == 1 else Interval(b[k], a[k + 1])
        branches.append(BranchMap.from_pieces(i, [AffinePiece.between(unit, target)], ambient))

    return BranchingSystem(
        ambient=ambient,
        branches=tuple(branches),
        matrix=FullOnesMatrix(ambient_row_count=n_max),
        name="o-infinity",
    )


def example_quadratic(n_max: int, ambient: Optional[RationalLike] = None) -> BranchingSystem:
    """
    Quadratic branches with R_i = [i-1, i) and D_i = [0, ceil(i/2)).

    F(x) = c (x - i)^2 on R_i for odd i and c (x - (i-1))^2 for even i, with
    c = ceil(i/2). The matrix is the staircase with row i = {1, ..., ceil(i/2)}.

    An ambient too short to hold every R_i is enlarged to the smallest power of
    two >= N_max.
    """
    if n_max < 1:
        raise ValueError("n_max must be a positive integer")
    needed = -(-n_max // 2)
    if ambient is None:
        ambient = Fraction(_next_power_of_two(Fraction(n_max)))
    ambient = as_rational(ambient)
    if ambient < needed:
        raise ValueError(f"Ambient [0, {ambient}) cannot hold D_{n_max} = [0, {needed})")
    if ambient < n_max:
        enlarged = Fraction(_next_power_of_two(Fraction(n_max)))
        logger.warning(
            f"Ambient [0, {ambient}) does not hold R_{n_max} = [{n_max - 1}, {n_max}); "
            f"using [0, {enlarged})"
        )
        ambient = enlarged

    branches = []
    for i in range(1, n_max + 1):
        c = Fraction(-(-i // 2))
        odd = i % 2 == 1
        piece = QuadraticPiece(
            source=Interval(Fraction(0), c),
            target=Interval(Fraction(i - 1), Fraction(i)),
            coeff=c,
            vertex=Fraction(i if odd else i - 1),
            orientation=-1 if odd else 1,
        )
        branches.append(BranchMap.from_pieces(i, [piece], ambient))

    return BranchingSystem(
        ambient=ambient,
        branches=tuple(branches),
        matrix=staircase_matrix(n_max),
        name="quadratic",
    )


def counterexample() -> BranchingSystem:
    """Identity branches on [0, 1) and [1, 2) paired with A = [[1, 1], [1, 0]].

    Every range is its own domain, so D_1 misses R_2 although A(1, 2) = 1.
    """
    ambient = Fraction(2)
    branches = tuple(
        BranchMap.from_pieces(
            i,
            [AffinePiece.between(Interval(Fraction(i - 1), Fraction(i)), Interval(Fraction(i - 1), Fraction(i)))],
            ambient,
        )
        for i in (1, 2)
    )
    matrix = ExplicitBlockMatrix.of([[1, 1], [1, 0]])
    return BranchingSystem(ambient=ambient, branches=branches, matrix=matrix, name="counterexample")


BUILTIN_NAMES = ("doubling", "o-infinity", "quadratic", "standard", "counterexample")

DEFAULT_STANDARD_ROWS: Sequence[Sequence[int]] = ((1, 1), (1, 0))


def builtin_system(
    name: str,
    n_max: Optional[int] = None,
    ambient: Optional[RationalLike] = None,
    matrix: Optional[ZeroOneMatrix] = None,
    remainder: RemainderPolicy = RemainderPolicy.IDENTITY,
) -> BranchingSystem:
    """
    Build one of the named systems.

    Raises:
        ValueError: for an unknown name
    """
    factories: Dict[str, Callable[[], BranchingSystem]] = {
        "doubling": doubling,
        "counterexample": counterexample,
        "o-infinity": lambda: example_O_infinity(n_max or 8),
        "quadratic": lambda: example_quadratic(n_max or 6, ambient),
        "standard": lambda: build_standard(
            matrix if matrix is not None else ExplicitBlockMatrix.of(DEFAULT_STANDARD_ROWS), n_max
        ),
    }
    if name not in factories:
        raise ValueError(f"Unknown builtin system '{name}'; choose from {', '.join(BUILTIN_NAMES)}")
    system = factories[name]()
    remainder = RemainderPolicy(remainder)
    if remainder is not system.remainder_policy:
        system = dataclasses.replace(system, remainder_policy=remainder)
    logger.debug(f"Loaded builtin system {name} (N_max = {system.n_max}, L = {system.ambient})")
    return system
