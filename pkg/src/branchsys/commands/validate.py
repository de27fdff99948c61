from branchsys.core.logging_config import logger
from branchsys.models.matrix import default_uv_pairs
from branchsys.schemas.config import RunConfig
from branchsys.services.validation import lemma_check, validate

from .dependencies import finish, get_system


def cmd_validate(config: RunConfig) -> int:
    """Check the six branching-system conditions; exit 2 names the failed conditions."""
    system = get_system(config)
    report = validate(
        system,
        grid_points_per_branch=config.relations.samples_per_branch,
        uv_pairs=default_uv_pairs(system.matrix, system.n_max, config.relations.uv_limit),
        tol=config.tolerances.round_trip,
    )
    for number in report.failed_conditions():
        condition = report.condition(number)
        first = condition.findings[0].message if condition.findings else ""
        logger.error(f"condition {number} ({condition.title}) fails: {first}")
    return finish(config, "validate", report, report.passed)


def cmd_lemma(config: RunConfig) -> int:
    system = get_system(config)
    report = lemma_check(system, cover_required=config.relations.cover_required)
    return finish(config, "lemma", report, report.passed)
