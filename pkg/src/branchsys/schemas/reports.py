"""Report models written by every command as ``<command>.json`` and ``<command>.txt``."""

from typing import Dict, List, Optional

from pydantic import Field

from branchsys.models.grid import GridFunction
from branchsys.schemas.base import BaseSchema


class Finding(BaseSchema):
    """One failed check inside a condition or relation."""

    message: str
    pair: Optional[List[int]] = None
    measure: Optional[str] = None
    residual: Optional[float] = None


class ConditionResult(BaseSchema):
    condition: int
    title: str
    passed: bool
    max_residual: Optional[float] = None
    findings: List[Finding] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)


class ValidationReport(BaseSchema):
    system: str
    n_max: int
    conditions: List[ConditionResult]
    vacuous_pairs: List[str] = Field(default_factory=list)
    truncated_pairs: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def condition(self, number: int) -> ConditionResult:
        return next(c for c in self.conditions if c.condition == number)

    def failed_conditions(self) -> List[int]:
        return [c.condition for c in self.conditions if not c.passed]


class RowCheck(BaseSchema):
    row: int
    passed: Optional[bool]
    skipped_reason: str = ""


class LemmaReport(BaseSchema):
    system: str
    ranges_disjoint: bool
    overlaps: List[Finding] = Field(default_factory=list)
    cover_required: bool
    cover: Optional[bool] = None
    uncovered_measure: Optional[str] = None
    rows: List[RowCheck] = Field(default_factory=list)
    implies_condition_4: bool
    implies_condition_5: bool

    @property
    def rows_pass(self) -> bool:
        return all(r.passed is not False for r in self.rows)

    @property
    def passed(self) -> bool:
        return self.ranges_disjoint and self.cover is not False and self.rows_pass


class RelationReport(BaseSchema):
    system: str
    test_functions: int
    tolerance: float
    max_residuals: Dict[str, float]
    worst_pairs: Dict[str, str] = Field(default_factory=dict)
    partial_isometry: Dict[str, float] = Field(default_factory=dict)
    vacuous_pairs: List[str] = Field(default_factory=list)
    truncated_pairs: List[str] = Field(default_factory=list)

    @property
    def failed_relations(self) -> List[str]:
        return sorted(k for k, v in self.max_residuals.items() if v > self.tolerance)

    @property
    def passed(self) -> bool:
        return not self.failed_relations


class PFApplyReport(BaseSchema):
    """Result of one application of the operator-sum formula."""

    system: str
    n: int
    mass_in: float
    mass_out: float
    mass_on_ranges: float
    sum_form_deviation: float
    defining_property_residuals: Dict[str, float] = Field(default_factory=dict)
    monte_carlo_samples: Optional[int] = None
    monte_carlo_empty: bool = False
    monte_carlo_l1: Optional[float] = None
    monte_carlo_tolerance: Optional[float] = None
    defining_tolerance: float = 1e-6
    result: Optional[GridFunction] = Field(default=None, exclude=True)

    @property
    def passed(self) -> bool:
        if any(r > self.defining_tolerance for r in self.defining_property_residuals.values()):
            return False
        if self.monte_carlo_l1 is not None and self.monte_carlo_tolerance is not None:
            return self.monte_carlo_l1 <= self.monte_carlo_tolerance
        return True


class PFReport(BaseSchema):
    """Truncation study: partial sums phi_N for increasing N."""

    system: str
    ns: List[int]
    l1_errors: Dict[int, float]
    masses: Dict[int, float]
    defining_property_residuals: Dict[str, float]
    monotonicity_violations: int
    defining_tolerance: float = 1e-6
    partial_sums: Dict[int, GridFunction] = Field(default_factory=dict, exclude=True)

    @property
    def errors_nonincreasing(self) -> bool:
        values = [self.l1_errors[n] for n in self.ns]
        return all(b <= a for a, b in zip(values, values[1:]))

    @property
    def passed(self) -> bool:
        return (
            self.monotonicity_violations == 0
            and self.errors_nonincreasing
            and all(r <= self.defining_tolerance for r in self.defining_property_residuals.values())
        )


class MatrixRepresentationReport(BaseSchema):
    system: str
    n_block: int
    derivatives: List[str]
    entries: List[List[str]]
    values: List[List[float]]
    column_residuals: List[float]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(r <= self.tolerance for r in self.column_residuals)


class InvariantDensityReport(BaseSchema):
    system: str
    converged: bool
    iterations: int
    errors: List[float]
    tol_l1: float
    max_iters: int
    density: Optional[GridFunction] = Field(default=None, exclude=True)

    @property
    def passed(self) -> bool:
        return self.converged
