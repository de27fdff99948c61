"""Reading run configs, system descriptions and input densities from disk."""

import re
import tomllib
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import ValidationError

from branchsys.core.exceptions import BranchSysError, ConfigError
from branchsys.core.logging_config import logger
from branchsys.models.branching import (
    AffinePiece,
    BranchingSystem,
    BranchMap,
    BranchPiece,
    PieceKind,
    QuadraticPiece,
)
from branchsys.models.grid import GridFunction
from branchsys.models.matrix import ZeroOneMatrix, matrix_from_dict
from branchsys.models.sets import Interval, IntervalUnion
from branchsys.schemas.config import (
    MatrixSection,
    PieceSpec,
    RunConfig,
    SystemDescription,
    SystemSection,
)
from branchsys.services.constructions import builtin_system

_TOML_LOCATION = re.compile(r"at line (\d+), column (\d+)")


def _read_toml(path: Path) -> Dict[str, Any]:
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"File not found: {path}")
    except UnicodeDecodeError as e:
        raise ConfigError(f"{path} is not valid UTF-8 ({e.reason})")
    except tomllib.TOMLDecodeError as e:
        lineno, colno = getattr(e, "lineno", None), getattr(e, "colno", None)
        if lineno is None:
            match = _TOML_LOCATION.search(str(e))
            if match:
                lineno, colno = int(match.group(1)), int(match.group(2))
        message = _TOML_LOCATION.sub("", str(e)).replace("()", "").strip()
        raise ConfigError(f"{path}: {message}", location=(lineno, colno) if lineno else None)


def _schema_error(path: Union[Path, str], error: ValidationError) -> ConfigError:
    first = error.errors()[0]
    key = ".".join(str(part) for part in first["loc"])
    return ConfigError(f"{first['msg']} in {path}", key=key)


def load_run_config(path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Parse a TOML run configuration and apply command-line overrides.

    Args:
        path: config file
        overrides: dotted keys (``"grid.cells"``) mapped to values; ``None`` values are ignored

    Raises:
        ConfigError: on syntax errors (with line and column) or schema errors (with the key path)
    """
    path = Path(path)
    data = _read_toml(path)
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        section = data
        *parents, leaf = dotted.split(".")
        for part in parents:
            section = section.setdefault(part, {})
        section[leaf] = value

    system = data.get("system")
    if isinstance(system, dict) and "description" in system:
        description = Path(system["description"])
        if not description.is_absolute():
            system["description"] = str(path.parent / description)
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        raise _schema_error(path, e)
    logger.debug(f"Loaded run config from {path}")
    return config


def _quad(values) -> Interval:
    return Interval(Fraction(values[0], values[1]), Fraction(values[2], values[3]))


def _piece(spec: PieceSpec) -> BranchPiece:
    if spec.kind is PieceKind.AFFINE:
        return AffinePiece(
            source=_quad(spec.source),
            target=_quad(spec.target),
            slope=spec.slope,
            intercept=spec.intercept,
        )
    return QuadraticPiece(
        source=_quad(spec.source),
        target=_quad(spec.target),
        coeff=spec.coeff,
        vertex=spec.vertex,
        orientation=spec.orientation,
        offset=spec.offset,
    )


def build_matrix(section: MatrixSection) -> ZeroOneMatrix:
    try:
        return matrix_from_dict(section.as_dict())
    except (ValueError, BranchSysError) as e:
        raise ConfigError(str(e), key="matrix")


def system_from_description(description: SystemDescription) -> BranchingSystem:
    """Build and cross-check a system written out piece by piece."""
    ambient = description.ambient
    matrix = build_matrix(description.matrix)
    branches = []
    for b, spec in enumerate(description.branches):
        pieces = []
        for p, piece_spec in enumerate(spec.pieces):
            try:
                pieces.append(_piece(piece_spec))
            except ValueError as e:
                raise ConfigError(str(e), key=f"branches.{b}.pieces.{p}")
        try:
            branch = BranchMap.from_pieces(spec.index, pieces, ambient)
        except ValueError as e:
            raise ConfigError(str(e), key=f"branches.{b}")
        for name, declared in (("domain", spec.domain), ("range", spec.range)):
            if declared is None:
                continue
            try:
                expected = IntervalUnion.from_quadruples(declared, ambient)
            except (ValueError, ZeroDivisionError) as e:
                raise ConfigError(str(e), key=f"branches.{b}.{name}")
            if not expected.ae_equal(getattr(branch, name)):
                raise ConfigError(
                    f"declared {name} {expected} differs from the piece tiling {getattr(branch, name)}",
                    key=f"branches.{b}.{name}",
                )
        branches.append(branch)
    if matrix.ambient_row_count != len(branches):
        logger.warning(
            f"Matrix declares {matrix.ambient_row_count} rows but the description has "
            f"{len(branches)} branches"
        )
    try:
        return BranchingSystem(
            ambient=ambient,
            branches=tuple(branches),
            matrix=matrix,
            remainder_policy=description.remainder,
            name=description.name,
        )
    except ValueError as e:
        raise ConfigError(str(e), key="branches")


def system_from_dict(data: Dict[str, Any], source: str = "<dict>") -> BranchingSystem:
    """Inverse of ``BranchingSystem.to_dict``."""
    try:
        description = SystemDescription.model_validate(data)
    except ValidationError as e:
        raise _schema_error(source, e)
    return system_from_description(description)


def load_system_description(path: Union[str, Path]) -> BranchingSystem:
    path = Path(path)
    system = system_from_dict(_read_toml(path), str(path))
    logger.info(f"Loaded system {system.name} with {system.n_max} branches from {path}")
    return system


def resolve_system(section: SystemSection) -> BranchingSystem:
    """The system a run config points at."""
    if section.description is not None:
        return load_system_description(section.description)
    matrix = build_matrix(section.matrix) if section.matrix is not None else None
    try:
        return builtin_system(
            section.builtin,
            n_max=section.n_max,
            ambient=section.ambient,
            matrix=matrix,
            remainder=section.remainder,
        )
    except (ValueError, BranchSysError) as e:
        raise ConfigError(str(e), key="system")


def read_density(path: Union[str, Path], system: BranchingSystem, cells: int) -> GridFunction:
    """Load an input CSV that must sit on the configured grid."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Input file not found: {path}")
    return GridFunction.from_csv(path, system.ambient, cells)
