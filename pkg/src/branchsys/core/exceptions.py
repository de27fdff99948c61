"""Exception hierarchy for branching systems and their operators."""

from typing import Any, List, Optional, Tuple


class BranchSysError(Exception):
    """Base class for all domain errors raised by branchsys."""


class AmbientMismatchError(BranchSysError):
    """Two interval unions or grid functions live on different ambient spaces."""

    def __init__(self, left, right):
        super().__init__(f"Ambient mismatch: [0, {left}) vs [0, {right})")
        self.left = left
        self.right = right


class OutOfDomainError(BranchSysError):
    """A point was evaluated outside the domain of the requested map."""

    def __init__(self, index: Optional[int], x: float):
        where = f"branch {index}" if index is not None else "the ambient space"
        super().__init__(f"Point {x!r} is outside the domain of {where}")
        self.index = index
        self.x = x


class ZeroRowError(BranchSysError):
    """An instantiated matrix row has no ones."""

    def __init__(self, row: int):
        super().__init__(f"Row {row} is identically zero among the instantiated columns")
        self.row = row


class NegativeInputError(BranchSysError):
    """The Perron-Frobenius sum formula needs a nonnegative input."""

    def __init__(self, minimum: float):
        super().__init__(f"Input density has negative cells (min value {minimum:.3e})")
        self.minimum = minimum


class NonFiniteInputError(BranchSysError):
    """A density contains NaN or infinite cells."""

    def __init__(self, count: int):
        super().__init__(f"Input density has {count} non-finite cells")
        self.count = count


class ZeroMassError(BranchSysError):
    """A density with zero L1 norm cannot be normalised or sampled."""


class NonconstantDerivativeError(BranchSysError):
    """A branch's Radon-Nikodym derivative is not a constant."""

    def __init__(self, index: int):
        super().__init__(f"Branch {index} has a nonconstant Radon-Nikodym derivative")
        self.index = index


class RowNotFiniteError(BranchSysError):
    """A matrix row has infinitely many ones."""

    def __init__(self, row: int):
        super().__init__(f"Row {row} is not finite")
        self.row = row


class NotConvergedError(BranchSysError):
    """Fixed-point iteration ran out of iterations."""

    def __init__(self, last: Any, errors: List[float]):
        final = errors[-1] if errors else float("nan")
        super().__init__(f"No convergence after {len(errors)} iterations (last error {final:.3e})")
        self.last = last
        self.errors = errors


class SupportViolationError(BranchSysError):
    """A density carries mass outside the union of the instantiated ranges."""

    def __init__(self, mass: float):
        super().__init__(f"Input carries mass {mass:.3e} outside the instantiated ranges")
        self.mass = mass


class GridMismatchError(BranchSysError):
    """A grid function does not match the expected cell count or ambient."""


class InconsistentSumError(BranchSysError):
    """The squared-adjoint and expanded forms of the operator sum disagree."""

    def __init__(self, deviation: float):
        super().__init__(f"Operator-sum forms disagree by {deviation:.3e}")
        self.deviation = deviation


class ConfigError(BranchSysError):
    """A configuration or system description could not be parsed."""

    def __init__(self, message: str, location: Optional[Tuple[int, int]] = None, key: str = ""):
        if location is not None:
            message = f"{message} (line {location[0]}, column {location[1]})"
        elif key:
            message = f"{key}: {message}"
        super().__init__(message)
        self.location = location
        self.key = key
