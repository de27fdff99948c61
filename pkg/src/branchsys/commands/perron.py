"""Dispatchers for the Perron-Frobenius commands: pf, truncation, matrix-rep, invariant."""

from branchsys.core.exceptions import (
    InconsistentSumError,
    NonconstantDerivativeError,
    NotConvergedError,
    RowNotFiniteError,
    ZeroMassError,
)
from branchsys.core.logging_config import logger
from branchsys.schemas.config import RunConfig
from branchsys.schemas.reports import InvariantDensityReport, PFApplyReport
from branchsys.services.perron import (
    defining_residuals,
    invariant_density,
    pf_apply_with_deviation,
    pf_matrix_representation,
    pf_monte_carlo,
    truncation_study,
)
from branchsys.services.reports import write_matrix_csv

from .dependencies import ExitCode, finish, get_system, initial_density


def cmd_pf(config: RunConfig) -> int:
    """Apply the operator sum once; check the defining property and optionally Monte-Carlo."""
    system = get_system(config)
    phi = initial_density(system, config)
    n = config.perron.n if config.perron.n is not None else system.n_max
    rule = config.grid.rule

    try:
        result, deviation = pf_apply_with_deviation(system, phi, n, rule)
    except InconsistentSumError as e:
        logger.error(f"pf: {e}")
        return ExitCode.CHECK_FAILED
    result.to_csv(config.output_dir / "pf.csv")

    report = PFApplyReport(
        system=system.name,
        n=n,
        mass_in=phi.integral(),
        mass_out=result.integral(),
        mass_on_ranges=phi.integral(system.ranges_union(n)),
        sum_form_deviation=deviation,
        defining_property_residuals=defining_residuals(system, phi, n, rule=rule),
        defining_tolerance=config.tolerances.defining,
        result=result,
    )
    samples = config.perron.samples
    if samples is not None:
        estimate = pf_monte_carlo(system, phi, samples, config.seed, config.perron.bins)
        estimate.to_csv(config.output_dir / "pf_monte_carlo.csv")
        report.monte_carlo_samples = samples
        # zero samples: flagged, not compared
        if samples == 0:
            report.monte_carlo_empty = True
        else:
            report.monte_carlo_l1 = estimate.distance_l1(result.coarsen(config.perron.bins))
            report.monte_carlo_tolerance = config.tolerances.monte_carlo
    return finish(config, "pf", report, report.passed)


def cmd_truncation(config: RunConfig) -> int:
    system = get_system(config)
    phi = initial_density(system, config)
    report = truncation_study(system, phi, config.perron.ns, rule=config.grid.rule)
    report.defining_tolerance = config.tolerances.defining
    for n, partial in sorted(report.partial_sums.items()):
        partial.to_csv(config.output_dir / f"truncation_N{n}.csv")
    return finish(config, "truncation", report, report.passed)


def cmd_matrix_rep(config: RunConfig) -> int:
    """Write the A^T B block as CSV; a violated hypothesis counts as a failed check."""
    system = get_system(config)
    try:
        report = pf_matrix_representation(
            system, config.perron.n_block, config.grid.cells, config.tolerances.matrix
        )
    except (RowNotFiniteError, NonconstantDerivativeError) as e:
        logger.error(f"matrix-rep: {e}")
        return ExitCode.CHECK_FAILED
    write_matrix_csv(config.output_dir / "matrix_rep.csv", report.values)
    return finish(config, "matrix_rep", report, report.passed)


def cmd_invariant(config: RunConfig) -> int:
    system = get_system(config)
    rho0 = initial_density(system, config)
    if rho0.norm_l1 <= 0:
        raise ZeroMassError("Initial density has zero mass")
    rho0 = rho0 / rho0.norm_l1
    try:
        report = invariant_density(
            system, rho0, config.perron.max_iters, config.perron.tol_l1, rule=config.grid.rule
        )
    except NotConvergedError as e:
        logger.error(f"invariant: {e}")
        report = InvariantDensityReport(
            system=system.name,
            converged=False,
            iterations=len(e.errors),
            errors=e.errors,
            tol_l1=config.perron.tol_l1,
            max_iters=config.perron.max_iters,
            density=e.last,
        )
    report.density.to_csv(config.output_dir / "invariant.csv")
    return finish(config, "invariant", report, report.passed)
