from .branching import (
    AffinePiece,
    BranchingSystem,
    BranchMap,
    BranchPiece,
    Evaluation,
    QuadraticPiece,
    RemainderPolicy,
)
from .grid import GridFunction
from .matrix import (
    NOT_FINITELY_SUPPORTED,
    ExplicitBlockMatrix,
    FullOnesMatrix,
    RowSupportsMatrix,
    RulePatternMatrix,
    ZeroOneMatrix,
)
from .sets import Interval, IntervalUnion

__all__ = [
    "Interval",
    "IntervalUnion",
    # Matrices
    "ZeroOneMatrix",
    "FullOnesMatrix",
    "ExplicitBlockMatrix",
    "RowSupportsMatrix",
    "RulePatternMatrix",
    "NOT_FINITELY_SUPPORTED",
    # Branching systems
    "BranchPiece",
    "AffinePiece",
    "QuadraticPiece",
    "BranchMap",
    "BranchingSystem",
    "RemainderPolicy",
    "Evaluation",
    "GridFunction",
]
