from branchsys.schemas.config import RunConfig
from branchsys.services.operators import random_test_functions, verify_ck_relations

from .dependencies import finish, get_system


def cmd_relations(config: RunConfig) -> int:
    """Verify the four generator relations on seeded random test functions."""
    system = get_system(config)
    test_fns = random_test_functions(
        system,
        count=config.relations.test_functions,
        n=config.grid.cells,
        seed=config.seed,
        blocks=config.grid.test_blocks,
    )
    report = verify_ck_relations(
        system,
        test_fns,
        tol=config.tolerances.relations,
        rule=config.grid.rule,
        uv_limit=config.relations.uv_limit,
    )
    return finish(config, "relations", report, report.passed)
