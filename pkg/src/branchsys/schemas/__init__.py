from .config import RunConfig, SystemDescription
from .reports import (
    InvariantDensityReport,
    LemmaReport,
    MatrixRepresentationReport,
    PFApplyReport,
    PFReport,
    RelationReport,
    ValidationReport,
)

__all__ = [
    "RunConfig",
    "SystemDescription",
    "ValidationReport",
    "LemmaReport",
    "RelationReport",
    "PFApplyReport",
    "PFReport",
    "MatrixRepresentationReport",
    "InvariantDensityReport",
]
