"""Exact finite unions of half-open intervals with rational endpoints.

Every set that appears in a branching system (domains D_i, ranges R_i, test
intervals) is an ``IntervalUnion`` inside an ambient space [0, L). Endpoints are
``fractions.Fraction`` values, so measure-zero statements are decided exactly.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from branchsys.core.exceptions import AmbientMismatchError

RationalLike = Union[int, Fraction, str]


def as_rational(value: RationalLike) -> Fraction:
    """Convert an int, Fraction or ``"p/q"`` string to a Fraction; floats are refused."""
    if isinstance(value, bool):
        raise TypeError("Booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return Fraction(int(value[0]), int(value[1]))
    raise TypeError(f"Expected an exact rational, got {type(value).__name__}")


class Interval(NamedTuple):
    """Half-open interval [lo, hi)."""

    lo: Fraction
    hi: Fraction

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo <= x < self.hi

    def intersect(self, other: "Interval") -> "Interval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo < hi else None


def _canonical(pieces: Iterable[Sequence[RationalLike]], ambient: Fraction) -> Tuple[Interval, ...]:
    items: List[Interval] = []
    for piece in pieces:
        lo, hi = as_rational(piece[0]), as_rational(piece[1])
        if lo >= hi:
            raise ValueError(f"Empty or reversed piece [{lo}, {hi})")
        if lo < 0 or hi > ambient:
            raise ValueError(f"Piece [{lo}, {hi}) is outside the ambient [0, {ambient})")
        items.append(Interval(lo, hi))
    items.sort()

    merged: List[Interval] = []
    for item in items:
        if merged and item.lo <= merged[-1].hi:
            last = merged.pop()
            merged.append(Interval(last.lo, max(last.hi, item.hi)))
        else:
            merged.append(item)
    return tuple(merged)


@dataclass(frozen=True)
class IntervalUnion:
    """Canonical finite union of disjoint, non-adjacent half-open intervals in [0, L)."""

    ambient: Fraction
    pieces: Tuple[Interval, ...] = ()

    def __post_init__(self):
        ambient = as_rational(self.ambient)
        if ambient <= 0:
            raise ValueError("Ambient length must be positive")
        object.__setattr__(self, "ambient", ambient)
        object.__setattr__(self, "pieces", _canonical(self.pieces, ambient))

    # Constructors

    @classmethod
    def empty(cls, ambient: RationalLike) -> "IntervalUnion":
        return cls(as_rational(ambient))

    @classmethod
    def full(cls, ambient: RationalLike) -> "IntervalUnion":
        ambient = as_rational(ambient)
        return cls(ambient, ((Fraction(0), ambient),))

    @classmethod
    def interval(cls, lo: RationalLike, hi: RationalLike, ambient: RationalLike) -> "IntervalUnion":
        return cls(as_rational(ambient), ((lo, hi),))

    @classmethod
    def from_quadruples(
        cls, quadruples: Iterable[Sequence[int]], ambient: RationalLike
    ) -> "IntervalUnion":
        """Build from ``[num_a, den_a, num_b, den_b]`` rows."""
        pieces = []
        for quad in quadruples:
            if len(quad) != 4:
                raise ValueError(f"Expected a quadruple, got {quad!r}")
            pieces.append((Fraction(int(quad[0]), int(quad[1])), Fraction(int(quad[2]), int(quad[3]))))
        return cls(as_rational(ambient), tuple(pieces))

    def to_quadruples(self) -> List[List[int]]:
        return [
            [p.lo.numerator, p.lo.denominator, p.hi.numerator, p.hi.denominator]
            for p in self.pieces
        ]

    # Set algebra

    def _check(self, other: "IntervalUnion") -> None:
        if self.ambient != other.ambient:
            raise AmbientMismatchError(self.ambient, other.ambient)

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        self._check(other)
        return IntervalUnion(self.ambient, self.pieces + other.pieces)

    def intersection(self, other: "IntervalUnion") -> "IntervalUnion":
        self._check(other)
        result: List[Interval] = []
        i = j = 0
        while i < len(self.pieces) and j < len(other.pieces):
            a, b = self.pieces[i], other.pieces[j]
            common = a.intersect(b)
            if common is not None:
                result.append(common)
            if a.hi <= b.hi:
                i += 1
            else:
                j += 1
        return IntervalUnion(self.ambient, tuple(result))

    def complement(self) -> "IntervalUnion":
        gaps: List[Interval] = []
        cursor = Fraction(0)
        for piece in self.pieces:
            if cursor < piece.lo:
                gaps.append(Interval(cursor, piece.lo))
            cursor = piece.hi
        if cursor < self.ambient:
            gaps.append(Interval(cursor, self.ambient))
        return IntervalUnion(self.ambient, tuple(gaps))

    def difference(self, other: "IntervalUnion") -> "IntervalUnion":
        self._check(other)
        return self.intersection(other.complement())

    def symmetric_difference(self, other: "IntervalUnion") -> "IntervalUnion":
        return self.difference(other).union(other.difference(self))

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __xor__ = symmetric_difference

    def __invert__(self) -> "IntervalUnion":
        return self.complement()

    # Measure and comparison

    @property
    def measure(self) -> Fraction:
        return sum((p.length for p in self.pieces), Fraction(0))

    def is_empty(self) -> bool:
        return not self.pieces

    def ae_equal(self, other: "IntervalUnion") -> bool:
        """True iff the symmetric difference has measure zero."""
        return self.symmetric_difference(other).measure == 0

    def contains_point(self, x) -> bool:
        return any(p.contains(x) for p in self.pieces)

    def contains_array(self, x: np.ndarray) -> np.ndarray:
        """Vectorised half-open membership for float points."""
        x = np.asarray(x, dtype=float)
        mask = np.zeros(x.shape, dtype=bool)
        for piece in self.pieces:
            mask |= (x >= float(piece.lo)) & (x < float(piece.hi))
        return mask

    def breakpoints(self) -> List[Fraction]:
        return [v for p in self.pieces for v in (p.lo, p.hi)]

    def __repr__(self) -> str:
        if not self.pieces:
            return f"IntervalUnion(∅ in [0, {self.ambient}))"
        body = " ∪ ".join(f"[{p.lo}, {p.hi})" for p in self.pieces)
        return f"IntervalUnion({body} in [0, {self.ambient}))"


def union_all(sets: Iterable[IntervalUnion], ambient: RationalLike) -> IntervalUnion:
    """Union of any number of sets; the empty family gives the empty set."""
    return reduce(IntervalUnion.union, sets, IntervalUnion.empty(ambient))


def intersect_all(sets: Iterable[IntervalUnion], ambient: RationalLike) -> IntervalUnion:
    """Intersection of any number of sets; the empty family gives the whole ambient."""
    return reduce(IntervalUnion.intersection, sets, IntervalUnion.full(ambient))
