"""
Shared helpers for the command dispatchers.

Each command receives a resolved ``RunConfig``, builds the system it names,
runs one family of checks and hands the report to ``finish``, which writes the
report files and maps the verdict to an exit code.
"""

from enum import IntEnum
from typing import Any, Dict

import numpy as np

from branchsys.core.exceptions import ZeroMassError
from branchsys.core.logging_config import logger
from branchsys.models.branching import BranchingSystem
from branchsys.models.grid import GridFunction
from branchsys.schemas.base import BaseSchema
from branchsys.schemas.config import RunConfig
from branchsys.services.operators import unaligned_breakpoints
from branchsys.services.reports import write_report
from branchsys.services.system_io import read_density, resolve_system


class ExitCode(IntEnum):
    OK = 0
    USAGE = 1
    CHECK_FAILED = 2


def get_system(config: RunConfig) -> BranchingSystem:
    """Build the configured system and warn when its breakpoints miss the grid."""
    system = resolve_system(config.system)
    off_grid = unaligned_breakpoints(system, config.grid.cells)
    if off_grid:
        shown = ", ".join(str(p) for p in off_grid[:5])
        more = f" and {len(off_grid) - 5} more" if len(off_grid) > 5 else ""
        logger.warning(
            f"{len(off_grid)} breakpoints of {system.name} are not edges of the "
            f"{config.grid.cells}-cell grid: {shown}{more}"
        )
    return system


def config_payload(config: RunConfig) -> Dict[str, Any]:
    return config.model_dump(mode="json")


def initial_density(system: BranchingSystem, config: RunConfig) -> GridFunction:
    """The input CSV if one is configured, else the named starting density with unit mass."""
    cells = config.grid.cells
    if config.perron.input_csv is not None:
        return read_density(config.perron.input_csv, system, cells)
    length = float(system.ambient)
    if config.perron.initial == "linear":
        # 2x / L^2 integrates to one
        return GridFunction.from_callable(lambda x: 2.0 * x / length**2, system.ambient, cells)
    if config.perron.initial == "ranges":
        # uniform on the instantiated ranges, as the truncation study requires
        support = GridFunction.indicator(system.ranges_union(), cells)
        if support.norm_l1 == 0:
            raise ZeroMassError(f"No grid cell of {system.name} lies in a range")
        return support / support.norm_l1
    return GridFunction.from_callable(lambda x: np.full_like(x, 1.0 / length), system.ambient, cells)


def finish(config: RunConfig, command: str, report: BaseSchema, passed: bool) -> int:
    write_report(config.output_dir, command, report, config_payload(config), passed)
    if passed:
        logger.info(f"{command}: pass")
        return ExitCode.OK
    logger.error(f"{command}: check failed")
    return ExitCode.CHECK_FAILED
