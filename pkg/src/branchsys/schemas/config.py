"""Run configuration and system description files (TOML)."""

from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import Field, field_validator, model_validator

from branchsys.core.config import settings
from branchsys.models.branching import DerivativeRule, PieceKind, RemainderPolicy
from branchsys.models.matrix import MatrixKind
from branchsys.schemas.base import Rational, StrictSchema

BuiltinName = Literal["doubling", "o-infinity", "quadratic", "standard", "counterexample"]


class MatrixSection(StrictSchema):
    """Kind tag plus the parameters that kind needs."""

    kind: MatrixKind
    n_max: Optional[int] = Field(default=None, ge=1)
    rows: Optional[List[List[int]]] = None
    supports: Optional[Dict[str, List[int]]] = None
    pattern: Optional[str] = None
    params: Dict[str, int] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_kind_parameters(self):
        if self.kind is MatrixKind.EXPLICIT_BLOCK:
            if not self.rows:
                raise ValueError("explicit_block matrices need 'rows'")
            if any(v not in (0, 1) for row in self.rows for v in row):
                raise ValueError("matrix entries must be 0 or 1")
        if self.kind is MatrixKind.ROW_SUPPORTS and self.supports is None:
            raise ValueError("row_supports matrices need 'supports'")
        if self.kind is MatrixKind.RULE_PATTERN and self.pattern is None:
            raise ValueError("rule_pattern matrices need 'pattern'")
        return self

    def as_dict(self) -> dict:
        return self.model_dump(exclude_none=True, mode="json")


class SystemSection(StrictSchema):
    builtin: Optional[BuiltinName] = None
    description: Optional[Path] = None
    n_max: Optional[int] = Field(default=None, ge=1)
    ambient: Optional[Rational] = None
    remainder: RemainderPolicy = RemainderPolicy.IDENTITY
    matrix: Optional[MatrixSection] = None

    @model_validator(mode="after")
    def check_source(self):
        if (self.builtin is None) == (self.description is None):
            raise ValueError("give exactly one of 'builtin' or 'description'")
        if self.ambient is not None and self.ambient <= 0:
            raise ValueError("ambient must be positive")
        return self


class GridSection(StrictSchema):
    cells: int = Field(default=settings.DEFAULT_GRID_CELLS, ge=2)
    test_blocks: int = Field(default=settings.DEFAULT_TEST_BLOCKS, ge=1)
    rule: DerivativeRule = DerivativeRule.SECANT

    @model_validator(mode="after")
    def check_blocks(self):
        if self.cells % self.test_blocks != 0:
            raise ValueError(f"cells ({self.cells}) must be a multiple of test_blocks ({self.test_blocks})")
        return self


class TolerancesSection(StrictSchema):
    relations: float = Field(default=settings.DEFAULT_TOLERANCE, gt=0)
    round_trip: float = Field(default=1e-10, gt=0)
    defining: float = Field(default=1e-6, gt=0)
    monte_carlo: float = Field(default=0.02, gt=0)
    matrix: float = Field(default=1e-12, gt=0)


class RelationsSection(StrictSchema):
    test_functions: int = Field(default=10, ge=1)
    uv_limit: int = Field(default=6, ge=1)
    samples_per_branch: int = Field(default=1000, ge=1)
    cover_required: bool = False


class PerronSection(StrictSchema):
    n: Optional[int] = Field(default=None, ge=0)
    input_csv: Optional[Path] = None
    ns: List[int] = Field(default_factory=lambda: [1, 2, 4, 8, 16])
    samples: Optional[int] = Field(default=None, ge=0)
    bins: int = Field(default=256, ge=2)
    max_iters: int = Field(default=100, ge=1)
    tol_l1: float = Field(default=1e-10, gt=0)
    initial: Literal["uniform", "linear", "ranges"] = "uniform"
    n_block: Optional[int] = Field(default=None, ge=1)

    @field_validator("ns")
    @classmethod
    def validate_ns(cls, v):
        if not v or any(n < 1 for n in v):
            raise ValueError("ns must be a nonempty list of positive integers")
        return sorted(set(v))


class RunConfig(StrictSchema):
    """Everything one command needs, after flags have been merged in."""

    seed: int = settings.DEFAULT_SEED
    output_dir: Path = Path("reports")
    system: SystemSection
    grid: GridSection = Field(default_factory=GridSection)
    tolerances: TolerancesSection = Field(default_factory=TolerancesSection)
    relations: RelationsSection = Field(default_factory=RelationsSection)
    perron: PerronSection = Field(default_factory=PerronSection)


class PieceSpec(StrictSchema):
    kind: PieceKind
    source: List[int] = Field(min_length=4, max_length=4)
    target: List[int] = Field(min_length=4, max_length=4)
    slope: Optional[Rational] = None
    intercept: Rational = 0
    coeff: Optional[Rational] = None
    vertex: Optional[Rational] = None
    orientation: Literal[1, -1] = 1
    offset: Rational = 0

    @model_validator(mode="after")
    def check_parameters(self):
        if self.source[1] == 0 or self.source[3] == 0 or self.target[1] == 0 or self.target[3] == 0:
            raise ValueError("zero denominator in an interval quadruple")
        if self.kind is PieceKind.AFFINE and self.slope is None:
            raise ValueError("affine pieces need 'slope'")
        if self.kind is PieceKind.QUADRATIC and (self.coeff is None or self.vertex is None):
            raise ValueError("quadratic pieces need 'coeff' and 'vertex'")
        return self


class BranchSpec(StrictSchema):
    index: int = Field(ge=1)
    pieces: List[PieceSpec] = Field(min_length=1)
    # optional cross-checks against the piece tiling
    domain: Optional[List[List[int]]] = None
    range: Optional[List[List[int]]] = None


class SystemDescription(StrictSchema):
    """A branching system written out piece by piece."""

    name: str = "custom"
    ambient: Rational
    remainder: RemainderPolicy = RemainderPolicy.IDENTITY
    matrix: MatrixSection
    branches: List[BranchSpec] = Field(min_length=1)

    @field_validator("branches")
    @classmethod
    def validate_order(cls, v):
        if [b.index for b in v] != list(range(1, len(v) + 1)):
            raise ValueError("branches must be numbered 1..N_max in order")
        return v
