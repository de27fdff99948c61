"""Possibly infinite 0-1 matrices given by entry rules.

Matrices are never materialised. Each kind answers ``entry(i, j)`` and
``row_support(i)``; a row support of ``None`` means the row has infinitely many
ones. ``ambient_row_count`` caps the rows a branching system instantiates.
Indices are 1-based throughout.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import (
    Callable,
    Dict,
    FrozenSet,
    Iterable,
    List,
    Literal,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from branchsys.core.exceptions import ZeroRowError


class MatrixKind(str, Enum):
    FULL_ONES = "full_ones"
    EXPLICIT_BLOCK = "explicit_block"
    ROW_SUPPORTS = "row_supports"
    RULE_PATTERN = "rule_pattern"


class _Marker(Enum):
    NOT_FINITELY_SUPPORTED = "not_finitely_supported"

    def __repr__(self) -> str:
        return "NotFinitelySupported"


NOT_FINITELY_SUPPORTED = _Marker.NOT_FINITELY_SUPPORTED
NotFinitelySupported = Literal[_Marker.NOT_FINITELY_SUPPORTED]
SupportResult = Union[FrozenSet[int], NotFinitelySupported]


@dataclass(frozen=True)
class ZeroOneMatrix:
    """Base rule object; subclasses define ``entry`` and ``row_support``."""

    ambient_row_count: int

    kind: MatrixKind = field(init=False, default=MatrixKind.FULL_ONES)

    def __post_init__(self):
        if self.ambient_row_count < 1:
            raise ValueError("ambient_row_count must be a positive integer")
        for i in range(1, self.ambient_row_count + 1):
            support = self.row_support(i)
            if support is not None and not support:
                raise ZeroRowError(i)

    def entry(self, i: int, j: int) -> int:
        raise NotImplementedError

    def row_support(self, i: int) -> Optional[FrozenSet[int]]:
        raise NotImplementedError

    def is_row_finite(self, i: int) -> bool:
        return self.row_support(i) is not None

    def a_uvj(self, U: Iterable[int], V: Iterable[int], j: int) -> int:
        """A(U,V,j) = prod_u A(u,j) * prod_v (1 - A(v,j)); empty products are 1."""
        for u in U:
            if self.entry(u, j) == 0:
                return 0
        for v in V:
            if self.entry(v, j) == 1:
                return 0
        return 1

    def support_uv(self, U: Iterable[int], V: Iterable[int]) -> SupportResult:
        """Exact {j : A(U,V,j) = 1} when provably finite, else the marker."""
        U, V = frozenset(U), frozenset(V)
        finite_rows = [s for s in (self.row_support(u) for u in U) if s is not None]
        if finite_rows:
            candidates = frozenset.intersection(*finite_rows)
            return frozenset(j for j in candidates if self.a_uvj(U, V, j) == 1)
        return self._unbounded_support(U, V)

    def _unbounded_support(self, U: FrozenSet[int], V: FrozenSet[int]) -> SupportResult:
        # Without a finite row in U, only kind-specific reasoning can bound the support.
        return NOT_FINITELY_SUPPORTED

    def instantiated_support(self, i: int, n_max: Optional[int] = None) -> Tuple[int, ...]:
        """Sorted columns j <= n_max with A(i, j) = 1."""
        n_max = self.ambient_row_count if n_max is None else n_max
        support = self.row_support(i)
        if support is None:
            return tuple(j for j in range(1, n_max + 1) if self.entry(i, j) == 1)
        return tuple(sorted(j for j in support if j <= n_max))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class FullOnesMatrix(ZeroOneMatrix):
    """A(i, j) = 1 everywhere; every row is infinite."""

    kind: MatrixKind = field(init=False, default=MatrixKind.FULL_ONES)

    def entry(self, i: int, j: int) -> int:
        return 1

    def row_support(self, i: int) -> Optional[FrozenSet[int]]:
        return None

    def _unbounded_support(self, U, V):
        # any v in V contributes a (1 - 1) factor
        return frozenset() if V else NOT_FINITELY_SUPPORTED

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "n_max": self.ambient_row_count}


@dataclass(frozen=True)
class ExplicitBlockMatrix(ZeroOneMatrix):
    """Finite block of rows; every entry outside the block is 0."""

    rows: Tuple[Tuple[int, ...], ...] = ()

    kind: MatrixKind = field(init=False, default=MatrixKind.EXPLICIT_BLOCK)

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.rows)
        if any(v not in (0, 1) for row in rows for v in row):
            raise ValueError("Matrix entries must be 0 or 1")
        object.__setattr__(self, "rows", rows)
        super().__post_init__()

    @classmethod
    def of(cls, rows: Sequence[Sequence[int]], n_max: Optional[int] = None) -> "ExplicitBlockMatrix":
        return cls(ambient_row_count=n_max or len(rows), rows=tuple(tuple(r) for r in rows))

    def entry(self, i: int, j: int) -> int:
        if 1 <= i <= len(self.rows) and 1 <= j <= len(self.rows[i - 1]):
            return self.rows[i - 1][j - 1]
        return 0

    def row_support(self, i: int) -> Optional[FrozenSet[int]]:
        if not 1 <= i <= len(self.rows):
            return frozenset()
        return frozenset(j for j, v in enumerate(self.rows[i - 1], start=1) if v == 1)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n_max": self.ambient_row_count,
            "rows": [list(r) for r in self.rows],
        }


@dataclass(frozen=True)
class RowSupportsMatrix(ZeroOneMatrix):
    """Rows given as finite index sets; unlisted rows are zero."""

    supports: Mapping[int, FrozenSet[int]] = field(default_factory=dict)

    kind: MatrixKind = field(init=False, default=MatrixKind.ROW_SUPPORTS)

    def __post_init__(self):
        supports = {int(i): frozenset(int(j) for j in js) for i, js in dict(self.supports).items()}
        if any(j < 1 for js in supports.values() for j in js) or any(i < 1 for i in supports):
            raise ValueError("Matrix indices are 1-based")
        object.__setattr__(self, "supports", supports)
        super().__post_init__()

    def __hash__(self):
        return hash((self.ambient_row_count, tuple(sorted((i, tuple(sorted(js))) for i, js in self.supports.items()))))

    def entry(self, i: int, j: int) -> int:
        return int(j in self.supports.get(i, frozenset()))

    def row_support(self, i: int) -> Optional[FrozenSet[int]]:
        return self.supports.get(i, frozenset())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n_max": self.ambient_row_count,
            "supports": {str(i): sorted(js) for i, js in sorted(self.supports.items())},
        }


def _staircase(step: int = 2) -> Callable[[int], FrozenSet[int]]:
    if step < 1:
        raise ValueError("staircase step must be positive")

    def support(i: int) -> FrozenSet[int]:
        return frozenset(range(1, -(-i // step) + 1))

    return support


# name -> factory(params) -> row_support rule
RULE_PATTERNS: Dict[str, Callable[..., Callable[[int], FrozenSet[int]]]] = {
    "staircase": _staircase,
}


@dataclass(frozen=True)
class RulePatternMatrix(ZeroOneMatrix):
    """Named rule with integer parameters, e.g. the staircase with rows {1, ..., ceil(i/2)}."""

    pattern: str = "staircase"
    params: Tuple[Tuple[str, int], ...] = ()

    kind: MatrixKind = field(init=False, default=MatrixKind.RULE_PATTERN)

    def __post_init__(self):
        if self.pattern not in RULE_PATTERNS:
            raise ValueError(f"Unknown matrix pattern: {self.pattern}")
        object.__setattr__(self, "params", tuple(sorted(dict(self.params).items())))
        super().__post_init__()

    @property
    def _rule(self) -> Callable[[int], FrozenSet[int]]:
        return RULE_PATTERNS[self.pattern](**dict(self.params))

    def entry(self, i: int, j: int) -> int:
        return int(j in self._rule(i))

    def row_support(self, i: int) -> Optional[FrozenSet[int]]:
        return self._rule(i)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n_max": self.ambient_row_count,
            "pattern": self.pattern,
            "params": dict(self.params),
        }


def staircase_matrix(n_max: int) -> RulePatternMatrix:
    """Row i has support {1, ..., ceil(i/2)}."""
    return RulePatternMatrix(ambient_row_count=n_max, pattern="staircase", params=(("step", 2),))


def matrix_from_dict(data: Mapping) -> ZeroOneMatrix:
    """Inverse of ``to_dict``; used by the config and system-description loaders."""
    kind = MatrixKind(data["kind"])
    n_max = data.get("n_max")
    if kind is MatrixKind.FULL_ONES:
        if n_max is None:
            raise ValueError("full_ones matrices need n_max")
        return FullOnesMatrix(ambient_row_count=int(n_max))
    if kind is MatrixKind.EXPLICIT_BLOCK:
        rows = data["rows"]
        return ExplicitBlockMatrix.of(rows, int(n_max) if n_max is not None else None)
    if kind is MatrixKind.ROW_SUPPORTS:
        supports = {int(i): frozenset(js) for i, js in data["supports"].items()}
        rows = int(n_max) if n_max is not None else max(supports, default=1)
        return RowSupportsMatrix(ambient_row_count=rows, supports=supports)
    params = tuple((str(k), int(v)) for k, v in dict(data.get("params", {})).items())
    if n_max is None:
        raise ValueError("rule_pattern matrices need n_max")
    return RulePatternMatrix(
        ambient_row_count=int(n_max), pattern=data.get("pattern", "staircase"), params=params
    )


UVPair = Tuple[FrozenSet[int], FrozenSet[int]]


def default_uv_pairs(m: ZeroOneMatrix, n_max: Optional[int] = None, limit: int = 6) -> List[UVPair]:
    """({i}, {}) for row-finite i, then ({i}, {j}) for i != j <= min(n_max, limit) with finite support."""
    n_max = m.ambient_row_count if n_max is None else n_max
    pairs: List[UVPair] = [
        (frozenset({i}), frozenset()) for i in range(1, n_max + 1) if m.is_row_finite(i)
    ]
    bound = min(n_max, limit)
    for i in range(1, bound + 1):
        for j in range(1, bound + 1):
            if i != j and m.support_uv({i}, {j}) is not NOT_FINITELY_SUPPORTED:
                pairs.append((frozenset({i}), frozenset({j})))
    return pairs


def format_uv(pair: UVPair) -> str:
    U, V = pair
    return f"U={{{','.join(map(str, sorted(U)))}}} V={{{','.join(map(str, sorted(V)))}}}"
