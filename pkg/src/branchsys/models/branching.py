"""Branch pieces, branch maps and branching systems on [0, L).

A branch f_i: D_i -> R_i is a finite list of monotone pieces with closed-form
inverse and derivative. The coarse map F undoes the branches on their ranges:
F(x) = f_i^{-1}(x) for x in R_i, and follows the remainder policy elsewhere.

Pointwise evaluation uses floats (vectorised with numpy); everything that decides
set membership or tiling uses the exact rational endpoints.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from branchsys.core.exceptions import OutOfDomainError
from branchsys.models.matrix import ZeroOneMatrix
from branchsys.models.sets import Interval, IntervalUnion, RationalLike, as_rational, union_all

# Irrational images are rounded to the nearest rational with this denominator cap.
MAX_DENOMINATOR = 2**40
_SQRT_SCALE_BITS = 96


def rational_sqrt(q: Fraction) -> Tuple[Fraction, Fraction]:
    """Square root of a nonnegative rational as (value, error bound).

    Exact when numerator and denominator are perfect squares; otherwise the
    nearest rational with denominator <= MAX_DENOMINATOR and a rigorous bound.
    """
    if q < 0:
        raise ValueError(f"Square root of negative rational {q}")
    p, d = q.numerator, q.denominator
    rp, rd = math.isqrt(p), math.isqrt(d)
    if rp * rp == p and rd * rd == d:
        return Fraction(rp, rd), Fraction(0)
    scale = 1 << _SQRT_SCALE_BITS
    # floor(sqrt(p*d) * scale) / (d * scale) is within 1/(d*scale) below sqrt(q)
    fine = Fraction(math.isqrt(p * d * scale * scale), d * scale)
    value = fine.limit_denominator(MAX_DENOMINATOR)
    bound = abs(value - fine) + Fraction(1, d * scale)
    return value, bound


class PieceKind(str, Enum):
    AFFINE = "affine"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class BranchPiece(ABC):
    """Monotone bijection from ``source`` (in D_i) onto ``target`` (in R_i)."""

    source: Interval
    target: Interval

    @property
    @abstractmethod
    def kind(self) -> PieceKind: ...

    @abstractmethod
    def forward(self, t: np.ndarray) -> np.ndarray:
        """f on the source side (vectorised)."""

    @abstractmethod
    def inverse(self, x: np.ndarray) -> np.ndarray:
        """f^{-1} on the target side (vectorised)."""

    @abstractmethod
    def derivative(self, t: np.ndarray) -> np.ndarray:
        """Phi_f(t) = |f'(t)|."""

    @abstractmethod
    def inverse_derivative(self, x: np.ndarray) -> np.ndarray:
        """Phi_{f^{-1}}(x) = |(f^{-1})'(x)|."""

    @abstractmethod
    def exact_inverse(self, x: Fraction) -> Fraction:
        """f^{-1} in rational arithmetic (polynomial in both kinds)."""

    @abstractmethod
    def exact_forward(self, t: Fraction) -> Tuple[Fraction, Fraction]:
        """f(t) as (rational value, error bound)."""

    @abstractmethod
    def is_increasing(self) -> bool: ...

    @abstractmethod
    def constant_derivative(self) -> Optional[Fraction]:
        """The constant value of Phi_f, or None when it varies."""

    @abstractmethod
    def structural_derivative_ok(self) -> bool:
        """Derivative is nonzero on the open source interval."""

    @abstractmethod
    def to_dict(self) -> dict: ...

    def _check_endpoints(self) -> None:
        if self.source.lo >= self.source.hi or self.target.lo >= self.target.hi:
            raise ValueError("Piece intervals must be nonempty")
        lo, hi = self.exact_inverse(self.target.lo), self.exact_inverse(self.target.hi)
        expected = (self.source.lo, self.source.hi) if self.is_increasing() else (
            self.source.hi,
            self.source.lo,
        )
        if (lo, hi) != expected:
            raise ValueError(
                f"Piece is not a bijection [{self.source.lo}, {self.source.hi}) -> "
                f"[{self.target.lo}, {self.target.hi}): inverse endpoints are {lo}, {hi}"
            )

    def image(self, sub: Interval) -> Tuple[Interval, Fraction]:
        """f(sub) for a subinterval of the source, with its rounding bound."""
        a, ea = self.exact_forward(sub.lo)
        b, eb = self.exact_forward(sub.hi)
        lo, hi = (a, b) if a <= b else (b, a)
        return Interval(lo, hi), max(ea, eb)

    def secant_derivative(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Cell-averaged Phi_f over [lo, hi) inside the source: |f(hi) - f(lo)| / (hi - lo)."""
        return np.abs(self.forward(hi) - self.forward(lo)) / (hi - lo)

    def secant_inverse_derivative(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        return np.abs(self.inverse(hi) - self.inverse(lo)) / (hi - lo)


@dataclass(frozen=True)
class AffinePiece(BranchPiece):
    """f(t) = slope * t + intercept."""

    slope: Fraction = Fraction(1)
    intercept: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "slope", as_rational(self.slope))
        object.__setattr__(self, "intercept", as_rational(self.intercept))
        if self.slope == 0:
            raise ValueError("Affine piece needs a nonzero slope")
        self._check_endpoints()

    @classmethod
    def between(cls, source: Interval, target: Interval, increasing: bool = True) -> "AffinePiece":
        """The affine bijection of ``source`` onto ``target`` with the given orientation."""
        if increasing:
            slope = target.length / source.length
            intercept = target.lo - slope * source.lo
        else:
            slope = -target.length / source.length
            intercept = target.hi - slope * source.lo
        return cls(source=source, target=target, slope=slope, intercept=intercept)

    @property
    def kind(self) -> PieceKind:
        return PieceKind.AFFINE

    def forward(self, t):
        return float(self.slope) * np.asarray(t, dtype=float) + float(self.intercept)

    def inverse(self, x):
        return (np.asarray(x, dtype=float) - float(self.intercept)) / float(self.slope)

    def derivative(self, t):
        return np.full(np.shape(t), abs(float(self.slope)))

    def inverse_derivative(self, x):
        return np.full(np.shape(x), 1.0 / abs(float(self.slope)))

    def secant_derivative(self, lo, hi):
        return self.derivative(lo)

    def secant_inverse_derivative(self, lo, hi):
        return self.inverse_derivative(lo)

    def exact_inverse(self, x: Fraction) -> Fraction:
        return (x - self.intercept) / self.slope

    def exact_forward(self, t: Fraction) -> Tuple[Fraction, Fraction]:
        return self.slope * t + self.intercept, Fraction(0)

    def is_increasing(self) -> bool:
        return self.slope > 0

    def constant_derivative(self) -> Optional[Fraction]:
        return abs(self.slope)

    def structural_derivative_ok(self) -> bool:
        return self.slope != 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "source": _interval_quad(self.source),
            "target": _interval_quad(self.target),
            "slope": str(self.slope),
            "intercept": str(self.intercept),
        }


@dataclass(frozen=True)
class QuadraticPiece(BranchPiece):
    """Monotone inverse of F(x) = coeff * (x - vertex)^2 + offset on one side of the vertex.

    f(t) = vertex + orientation * sqrt((t - offset) / coeff); ``orientation`` = +1
    selects the side x >= vertex, -1 the side x <= vertex.
    """

    coeff: Fraction = Fraction(1)
    vertex: Fraction = Fraction(0)
    orientation: int = 1
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("coeff", "vertex", "offset"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        if self.coeff == 0:
            raise ValueError("Quadratic piece needs a nonzero coefficient")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if self.orientation == 1 and self.target.lo < self.vertex:
            raise ValueError("Target must lie on the right of the vertex")
        if self.orientation == -1 and self.target.hi > self.vertex:
            raise ValueError("Target must lie on the left of the vertex")
        self._check_endpoints()

    @property
    def kind(self) -> PieceKind:
        return PieceKind.QUADRATIC

    def _radicand(self, t):
        # clip round-off below zero at the vertex end
        return np.maximum((np.asarray(t, dtype=float) - float(self.offset)) / float(self.coeff), 0.0)

    def forward(self, t):
        return float(self.vertex) + self.orientation * np.sqrt(self._radicand(t))

    def inverse(self, x):
        d = np.asarray(x, dtype=float) - float(self.vertex)
        return float(self.coeff) * d * d + float(self.offset)

    def derivative(self, t):
        with np.errstate(divide="ignore"):
            return 1.0 / (2.0 * abs(float(self.coeff)) * np.sqrt(self._radicand(t)))

    def inverse_derivative(self, x):
        return np.abs(2.0 * float(self.coeff) * (np.asarray(x, dtype=float) - float(self.vertex)))

    def exact_inverse(self, x: Fraction) -> Fraction:
        return self.coeff * (x - self.vertex) ** 2 + self.offset

    def exact_forward(self, t: Fraction) -> Tuple[Fraction, Fraction]:
        root, bound = rational_sqrt((t - self.offset) / self.coeff)
        return self.vertex + self.orientation * root, bound

    def is_increasing(self) -> bool:
        return self.orientation * self.coeff > 0

    def constant_derivative(self) -> Optional[Fraction]:
        return None

    def structural_derivative_ok(self) -> bool:
        # vertex excluded from the open target interval
        return not (self.target.lo < self.vertex < self.target.hi)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "source": _interval_quad(self.source),
            "target": _interval_quad(self.target),
            "coeff": str(self.coeff),
            "vertex": str(self.vertex),
            "orientation": self.orientation,
            "offset": str(self.offset),
        }


def _interval_quad(interval: Interval) -> List[int]:
    return [interval.lo.numerator, interval.lo.denominator, interval.hi.numerator, interval.hi.denominator]


def piece_from_dict(data: dict) -> BranchPiece:
    """Rebuild a piece from its ``to_dict`` form."""
    source = Interval(Fraction(data["source"][0], data["source"][1]), Fraction(data["source"][2], data["source"][3]))
    target = Interval(Fraction(data["target"][0], data["target"][1]), Fraction(data["target"][2], data["target"][3]))
    kind = PieceKind(data["kind"])
    if kind is PieceKind.AFFINE:
        return AffinePiece(
            source=source,
            target=target,
            slope=as_rational(data["slope"]),
            intercept=as_rational(data.get("intercept", 0)),
        )
    return QuadraticPiece(
        source=source,
        target=target,
        coeff=as_rational(data["coeff"]),
        vertex=as_rational(data["vertex"]),
        orientation=int(data["orientation"]),
        offset=as_rational(data.get("offset", 0)),
    )


def compose_pieces(outer: BranchPiece, inner: BranchPiece) -> BranchPiece:
    """Closed form of outer o inner; ``inner.target`` must lie inside ``outer.source``.

    Affine o affine, quadratic o affine and affine o quadratic stay in the piece
    family. The composed target must have rational endpoints.
    """
    if not (outer.source.lo <= inner.target.lo and inner.target.hi <= outer.source.hi):
        raise ValueError("Inner target is not contained in the outer source")
    target, bound = outer.image(inner.target)
    if bound != 0:
        raise ValueError("Composition has irrational endpoints")

    if isinstance(outer, AffinePiece) and isinstance(inner, AffinePiece):
        return AffinePiece(
            source=inner.source,
            target=target,
            slope=outer.slope * inner.slope,
            intercept=outer.slope * inner.intercept + outer.intercept,
        )
    if isinstance(outer, QuadraticPiece) and isinstance(inner, AffinePiece):
        # sqrt((a t + b - offset) / c) = sqrt((t - (offset - b) / a) / (c / a))
        a, b = inner.slope, inner.intercept
        return QuadraticPiece(
            source=inner.source,
            target=target,
            coeff=outer.coeff / a,
            vertex=outer.vertex,
            orientation=outer.orientation,
            offset=(outer.offset - b) / a,
        )
    if isinstance(outer, AffinePiece) and isinstance(inner, QuadraticPiece):
        # a (v + s sqrt(u / c)) + b = (a v + b) + sign(a) s sqrt(u / (c / a^2))
        a, b = outer.slope, outer.intercept
        return QuadraticPiece(
            source=inner.source,
            target=target,
            coeff=inner.coeff / (a * a),
            vertex=a * inner.vertex + b,
            orientation=(1 if a > 0 else -1) * inner.orientation,
            offset=inner.offset,
        )
    raise ValueError(f"No closed form for {outer.kind.value} o {inner.kind.value}")


def _interior_samples(interval: Interval, count: int) -> np.ndarray:
    lo, hi = float(interval.lo), float(interval.hi)
    return lo + (np.arange(count) + 0.5) * (hi - lo) / count


def chain_rule_residual(outer: BranchPiece, inner: BranchPiece, samples: int = 1000) -> float:
    """max |Phi_{g o f}(x) - Phi_g(f(x)) Phi_f(x)| over interior samples of f's source."""
    composed = compose_pieces(outer, inner)
    t = _interior_samples(inner.source, samples)
    direct = composed.derivative(t)
    product = outer.derivative(inner.forward(t)) * inner.derivative(t)
    return float(np.max(np.abs(direct - product)))


def reciprocal_residual(piece: BranchPiece, samples: int = 1000) -> float:
    """max |Phi_f(t) Phi_{f^{-1}}(f(t)) - 1| over interior samples."""
    t = _interior_samples(piece.source, samples)
    return float(np.max(np.abs(piece.derivative(t) * piece.inverse_derivative(piece.forward(t)) - 1.0)))


@dataclass(frozen=True)
class BranchMap:
    """f_i: D_i -> R_i built from pieces whose sources tile D_i and targets tile R_i."""

    index: int
    domain: IntervalUnion
    range: IntervalUnion
    pieces: Tuple[BranchPiece, ...]

    @classmethod
    def from_pieces(cls, index: int, pieces: Sequence[BranchPiece], ambient: RationalLike) -> "BranchMap":
        ambient = as_rational(ambient)
        domain = union_all((IntervalUnion(ambient, (p.source,)) for p in pieces), ambient)
        rng = union_all((IntervalUnion(ambient, (p.target,)) for p in pieces), ambient)
        return cls(index=index, domain=domain, range=rng, pieces=tuple(pieces))

    def _source_piece(self, t) -> BranchPiece:
        for piece in self.pieces:
            if piece.source.contains(t):
                return piece
        raise OutOfDomainError(self.index, float(t))

    def _target_piece(self, x) -> BranchPiece:
        for piece in self.pieces:
            if piece.target.contains(x):
                return piece
        raise OutOfDomainError(self.index, float(x))

    def forward(self, t) -> float:
        return float(self._source_piece(t).forward(t))

    def inverse(self, x) -> float:
        return float(self._target_piece(x).inverse(x))

    def derivative(self, t) -> float:
        return float(self._source_piece(t).derivative(t))

    def inverse_derivative(self, x) -> float:
        return float(self._target_piece(x).inverse_derivative(x))

    def constant_derivative(self) -> Optional[Fraction]:
        values = {p.constant_derivative() for p in self.pieces}
        if len(values) != 1 or None in values:
            return None
        return values.pop()

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "domain": self.domain.to_quadruples(),
            "range": self.range.to_quadruples(),
            "pieces": [p.to_dict() for p in self.pieces],
        }


class RemainderPolicy(str, Enum):
    """How F acts on points outside every range."""

    IDENTITY = "identity"
    ZERO = "zero"


class DerivativeRule(str, Enum):
    """How a Radon-Nikodym derivative is sampled on a grid cell."""

    SECANT = "secant"  # mu(f(cell)) / mu(cell)
    MIDPOINT = "midpoint"


class Evaluation(str, Enum):
    F = "F"
    F_I = "f"
    PHI_F = "phi_f"
    PHI_F_INV = "phi_f_inv"


@dataclass(frozen=True)
class BranchingSystem:
    """The family ({f_i}, {D_i}) with coarse map F on [0, L)."""

    ambient: Fraction
    branches: Tuple[BranchMap, ...]
    matrix: ZeroOneMatrix
    remainder_policy: RemainderPolicy = RemainderPolicy.IDENTITY
    name: str = "custom"
    _by_index: Dict[int, BranchMap] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ambient", as_rational(self.ambient))
        object.__setattr__(self, "remainder_policy", RemainderPolicy(self.remainder_policy))
        indices = [b.index for b in self.branches]
        if indices != list(range(1, len(indices) + 1)):
            raise ValueError("Branches must be indexed 1..N_max in order")
        for branch in self.branches:
            if branch.domain.ambient != self.ambient or branch.range.ambient != self.ambient:
                raise ValueError(f"Branch {branch.index} lives on a different ambient")
        object.__setattr__(self, "_by_index", {b.index: b for b in self.branches})

    @property
    def n_max(self) -> int:
        return len(self.branches)

    @property
    def space(self) -> IntervalUnion:
        return IntervalUnion.full(self.ambient)

    def branch(self, i: int) -> BranchMap:
        try:
            return self._by_index[i]
        except KeyError:
            raise ValueError(f"System {self.name} has no branch {i} (N_max = {self.n_max})")

    def ranges_union(self, n: Optional[int] = None) -> IntervalUnion:
        n = self.n_max if n is None else n
        return union_all((b.range for b in self.branches[:n]), self.ambient)

    def coarse_map(self, x) -> float:
        """F(x): the inverse of the branch whose range holds x, else the remainder policy."""
        if not 0 <= x < self.ambient:
            raise OutOfDomainError(None, float(x))
        for branch in self.branches:
            if branch.range.contains_point(x):
                return branch.inverse(x)
        return float(x) if self.remainder_policy is RemainderPolicy.IDENTITY else 0.0

    def coarse_map_array(self, x: np.ndarray) -> np.ndarray:
        """Vectorised F; the first branch whose range holds a point wins."""
        x = np.asarray(x, dtype=float)
        if self.remainder_policy is RemainderPolicy.IDENTITY:
            out = x.copy()
        else:
            out = np.zeros_like(x)
        done = np.zeros(x.shape, dtype=bool)
        for branch in self.branches:
            for piece in branch.pieces:
                mask = ~done & (x >= float(piece.target.lo)) & (x < float(piece.target.hi))
                if mask.any():
                    out[mask] = piece.inverse(x[mask])
                    done |= mask
        return out

    def eval(self, what: Evaluation, x, i: Optional[int] = None) -> float:
        """Pointwise F, f_i, Phi_{f_i} or Phi_{f_i^{-1}}."""
        what = Evaluation(what)
        if what is Evaluation.F:
            return self.coarse_map(x)
        if i is None:
            raise ValueError(f"Evaluating {what.value} needs a branch index")
        branch = self.branch(i)
        if what is Evaluation.F_I:
            return branch.forward(x)
        if what is Evaluation.PHI_F:
            return branch.derivative(x)
        return branch.inverse_derivative(x)

    def breakpoints(self) -> List[Fraction]:
        points = set()
        for branch in self.branches:
            points.update(branch.domain.breakpoints())
            points.update(branch.range.breakpoints())
            for piece in branch.pieces:
                points.update((piece.source.lo, piece.source.hi, piece.target.lo, piece.target.hi))
        return sorted(points)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ambient": str(self.ambient),
            "remainder": self.remainder_policy.value,
            "matrix": self.matrix.to_dict(),
            "branches": [b.to_dict() for b in self.branches],
        }
