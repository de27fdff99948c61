"""Uniform-grid functions on [0, L).

Value k belongs to the cell [kL/n, (k+1)L/n) and is read at the cell midpoint.
Integrals use midpoint quadrature with cell width h = L/n.
"""

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Union

import numpy as np

from branchsys.core.exceptions import AmbientMismatchError, GridMismatchError
from branchsys.models.sets import IntervalUnion, RationalLike, as_rational

CSV_HEADER = ("midpoint", "value")

Scalar = Union[int, float]


def format_value(value: float) -> str:
    """Shortest round-tripping positional decimal."""
    return np.format_float_positional(float(value), unique=True, trim="-")


@dataclass(frozen=True, eq=False)
class GridFunction:
    ambient: Fraction
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ambient", as_rational(self.ambient))
        values = np.array(self.values, dtype=float)
        if values.ndim != 1:
            raise GridMismatchError("Grid values must be one-dimensional")
        if values.size < 2:
            raise GridMismatchError(f"A grid needs at least 2 cells, got {values.size}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    # Constructors

    @classmethod
    def zeros(cls, ambient: RationalLike, n: int) -> "GridFunction":
        return cls(as_rational(ambient), np.zeros(n))

    @classmethod
    def constant(cls, ambient: RationalLike, n: int, value: float) -> "GridFunction":
        return cls(as_rational(ambient), np.full(n, float(value)))

    @classmethod
    def from_callable(
        cls, fn: Callable[[np.ndarray], np.ndarray], ambient: RationalLike, n: int
    ) -> "GridFunction":
        """Sample a vectorised function at the cell midpoints."""
        ambient = as_rational(ambient)
        return cls(ambient, np.broadcast_to(fn(cell_midpoints(ambient, n)), (n,)))

    @classmethod
    def indicator(cls, subset: IntervalUnion, n: int) -> "GridFunction":
        """chi_S read at the midpoints; exact when the endpoints of S sit on cell edges."""
        mids = cell_midpoints(subset.ambient, n)
        return cls(subset.ambient, subset.contains_array(mids).astype(float))

    # Grid geometry

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def h(self) -> float:
        return float(self.ambient) / self.n

    @property
    def midpoints(self) -> np.ndarray:
        return cell_midpoints(self.ambient, self.n)

    def cell_index(self, x: np.ndarray) -> np.ndarray:
        """Index of the cell holding each point; points at L fall in the last cell."""
        idx = np.floor(np.asarray(x, dtype=float) / self.h).astype(np.int64)
        return np.clip(idx, 0, self.n - 1)

    def lookup(self, x: np.ndarray) -> np.ndarray:
        """Piecewise-constant evaluation."""
        return self.values[self.cell_index(x)]

    # Quadrature

    @property
    def norm_l1(self) -> float:
        return self.h * float(np.sum(np.abs(self.values)))

    @property
    def norm_l2(self) -> float:
        return float(np.sqrt(self.h * np.sum(self.values * self.values)))

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def integral(self, subset: Optional[IntervalUnion] = None) -> float:
        """Midpoint rule over the whole ambient or over ``subset``."""
        if subset is None:
            return self.h * float(np.sum(self.values))
        if subset.ambient != self.ambient:
            raise AmbientMismatchError(self.ambient, subset.ambient)
        return self.h * float(np.sum(self.values[subset.contains_array(self.midpoints)]))

    def inner(self, other: "GridFunction") -> float:
        self._check_compatible(other)
        return self.h * float(np.dot(self.values, other.values))

    def distance_l1(self, other: "GridFunction") -> float:
        return (self - other).norm_l1

    # Arithmetic

    def _check_compatible(self, other: "GridFunction") -> None:
        if self.ambient != other.ambient:
            raise AmbientMismatchError(self.ambient, other.ambient)
        if self.n != other.n:
            raise GridMismatchError(f"Cell counts differ: {self.n} vs {other.n}")

    def _values_of(self, other) -> Union[np.ndarray, float]:
        if isinstance(other, GridFunction):
            self._check_compatible(other)
            return other.values
        return float(other)

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.ambient, values)

    def __add__(self, other):
        return self.with_values(self.values + self._values_of(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.with_values(self.values - self._values_of(other))

    def __mul__(self, other):
        return self.with_values(self.values * self._values_of(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar):
        return self.with_values(self.values / float(other))

    def __neg__(self):
        return self.with_values(-self.values)

    def allclose(self, other: "GridFunction", atol: float = 1e-12) -> bool:
        self._check_compatible(other)
        return bool(np.allclose(self.values, other.values, rtol=0.0, atol=atol))

    def coarsen(self, bins: int) -> "GridFunction":
        """Cell averages over ``bins`` equal groups of cells."""
        if bins < 2 or self.n % bins != 0:
            raise GridMismatchError(f"Cannot coarsen {self.n} cells into {bins} bins")
        return self.with_values(self.values.reshape(bins, self.n // bins).mean(axis=1))

    # CSV

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for mid, value in zip(self.midpoints, self.values):
                writer.writerow((format_value(mid), format_value(value)))
        return path

    @classmethod
    def from_csv(
        cls, path: Union[str, Path], ambient: RationalLike, n: Optional[int] = None
    ) -> "GridFunction":
        """Read a ``midpoint,value`` file and check it sits on the expected grid."""
        ambient = as_rational(ambient)
        with Path(path).open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
                raise GridMismatchError(f"{path}: expected header 'midpoint,value'")
            rows: List[List[str]] = [row for row in reader if row]
        try:
            mids = np.array([float(r[0]) for r in rows])
            values = np.array([float(r[1]) for r in rows])
        except (IndexError, ValueError) as e:
            raise GridMismatchError(f"{path}: malformed row ({e})")
        if n is not None and len(values) != n:
            raise GridMismatchError(f"{path}: expected {n} cells, found {len(values)}")
        if len(values) < 2:
            raise GridMismatchError(f"{path}: a grid needs at least 2 cells")
        expected = cell_midpoints(ambient, len(values))
        tolerance = 1e-9 * float(ambient) / len(values)
        if not np.allclose(mids, expected, rtol=0.0, atol=tolerance):
            raise GridMismatchError(f"{path}: midpoints do not match the grid on [0, {ambient})")
        return cls(ambient, values)


def cell_midpoints(ambient: RationalLike, n: int) -> np.ndarray:
    h = float(as_rational(ambient)) / n
    return (np.arange(n) + 0.5) * h


def unaligned(points: Iterable[Fraction], ambient: RationalLike, n: int) -> List[Fraction]:
    """Rational points that are not cell edges of the n-cell grid."""
    ambient = as_rational(ambient)
    out = []
    for p in points:
        # p is an edge iff p * n / L is an integer
        if (Fraction(p) * n / ambient).denominator != 1:
            out.append(Fraction(p))
    return sorted(set(out))
