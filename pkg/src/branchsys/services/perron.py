"""The Perron-Frobenius operator of F through the representation operators.

P_F(phi) = sum_i (S_i* sqrt(phi))^2 = sum_i chi_{D_i} Phi_{f_i} (phi o f_i) for phi >= 0,
with the defining property int_A P_F phi = int_{F^{-1}(A)} phi as an independent check.
"""

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from branchsys.core.config import settings
from branchsys.core.exceptions import (
    InconsistentSumError,
    NegativeInputError,
    NonFiniteInputError,
    NonconstantDerivativeError,
    NotConvergedError,
    RowNotFiniteError,
    SupportViolationError,
    ZeroMassError,
)
from branchsys.core.logging_config import logger
from branchsys.models.branching import BranchingSystem, DerivativeRule
from branchsys.models.grid import GridFunction
from branchsys.models.sets import Interval, IntervalUnion, union_all
from branchsys.schemas.reports import (
    InvariantDensityReport,
    MatrixRepresentationReport,
    PFReport,
)
from branchsys.services.operators import representation

NEGATIVE_SLACK = 1e-12
SUM_FORM_TOLERANCE = 1e-12


def _checked_nonnegative(phi: GridFunction) -> np.ndarray:
    bad = int(np.count_nonzero(~np.isfinite(phi.values)))
    if bad:
        raise NonFiniteInputError(bad)
    minimum = float(np.min(phi.values))
    if minimum < -NEGATIVE_SLACK:
        raise NegativeInputError(minimum)
    return np.maximum(phi.values, 0.0)


def _check_n(system: BranchingSystem, n: Optional[int]) -> int:
    n = system.n_max if n is None else n
    if not 0 <= n <= system.n_max:
        raise ValueError(f"N = {n} is outside 0..{system.n_max}")
    return n


def pf_apply_with_deviation(
    system: BranchingSystem,
    phi: GridFunction,
    n: Optional[int] = None,
    rule: DerivativeRule = DerivativeRule.SECANT,
) -> Tuple[GridFunction, float]:
    """Operator-sum result and its largest relative gap to the expanded form."""
    n = _check_n(system, n)
    values = _checked_nonnegative(phi)
    rep = representation(system, phi.n, rule)
    root = phi.with_values(np.sqrt(values))

    squared = np.zeros(phi.n)
    expanded = np.zeros(phi.n)
    # reduce in index order for reproducible round-off
    for i in range(1, n + 1):
        squared += rep.S_star(i, root).values ** 2
        t = rep.transport(i, adjoint=True)
        np.add.at(expanded, t.cells, t.weights * values[t.reads])

    deviation = float(np.max(np.abs(squared - expanded) / np.maximum(1.0, np.abs(expanded)), initial=0.0))
    if deviation > SUM_FORM_TOLERANCE:
        raise InconsistentSumError(deviation)
    return phi.with_values(squared), deviation


def pf_apply(
    system: BranchingSystem,
    phi: GridFunction,
    n: Optional[int] = None,
    rule: DerivativeRule = DerivativeRule.SECANT,
) -> GridFunction:
    """
    Partial sum of the operator formula over the first N branches.

    Args:
        system: branching system
        phi: nonnegative grid function on the system's ambient
        n: number of branches summed; defaults to N_max

    Returns:
        P_F phi on the same grid

    Raises:
        NegativeInputError: if some cell is below -1e-12
        NonFiniteInputError: if some cell is NaN or infinite
        InconsistentSumError: if the squared-adjoint and expanded forms disagree
    """
    result, _ = pf_apply_with_deviation(system, phi, n, rule)
    return result


def preimage_with_bound(
    system: BranchingSystem, subset: IntervalUnion, n: Optional[int] = None
) -> Tuple[IntervalUnion, Fraction]:
    """Union over i <= N of f_i(A cap D_i), with the largest endpoint rounding bound."""
    n = _check_n(system, n)
    images: List[IntervalUnion] = []
    bound = Fraction(0)
    for branch in system.branches[:n]:
        for piece in branch.pieces:
            for part in subset.pieces:
                common = part.intersect(piece.source)
                if common is None:
                    continue
                image, err = piece.image(common)
                bound = max(bound, err)
                lo, hi = max(image.lo, piece.target.lo), min(image.hi, piece.target.hi)
                if lo < hi:
                    images.append(IntervalUnion(system.ambient, (Interval(lo, hi),)))
    return union_all(images, system.ambient), bound


def preimage_of_interval(
    system: BranchingSystem, subset: IntervalUnion, n: Optional[int] = None
) -> IntervalUnion:
    """F^{-1}(A) restricted to the first N ranges."""
    return preimage_with_bound(system, subset, n)[0]


def pf_defining_residual(
    system: BranchingSystem,
    phi: GridFunction,
    subset: IntervalUnion,
    n: Optional[int] = None,
    rule: DerivativeRule = DerivativeRule.SECANT,
) -> float:
    """|int_A P_F phi - int_{F^{-1}(A)} phi|, both by midpoint quadrature."""
    lhs = pf_apply(system, phi, n, rule).integral(subset)
    rhs = phi.integral(preimage_of_interval(system, subset, n))
    return abs(lhs - rhs)


def dyadic_intervals(system: BranchingSystem, count: int = 8) -> List[IntervalUnion]:
    step = system.ambient / count
    return [IntervalUnion.interval(k * step, (k + 1) * step, system.ambient) for k in range(count)]


def defining_residuals(
    system: BranchingSystem,
    phi: GridFunction,
    n: Optional[int] = None,
    count: int = 8,
    rule: DerivativeRule = DerivativeRule.SECANT,
) -> Dict[str, float]:
    """Defining-property residuals on ``count`` equal test intervals."""
    image = pf_apply(system, phi, n, rule)
    out = {}
    for subset in dyadic_intervals(system, count):
        piece = subset.pieces[0]
        rhs = phi.integral(preimage_of_interval(system, subset, n))
        out[f"[{piece.lo}, {piece.hi})"] = abs(image.integral(subset) - rhs)
    return out


def pf_monte_carlo(
    system: BranchingSystem,
    phi: GridFunction,
    samples: int,
    seed: Optional[int] = None,
    bins: int = 256,
) -> GridFunction:
    """
    Histogram estimate of P_F phi: draw points from phi / ||phi||_1 by inverse CDF
    on the grid, push them through F and rescale the bin counts by the mass.
    """
    values = _checked_nonnegative(phi)
    mass = phi.h * float(np.sum(values))
    if mass <= 0:
        raise ZeroMassError("Cannot sample from a density with zero mass")
    if samples == 0:
        logger.warning("Monte-Carlo estimate requested with zero samples; returning zeros")
        return GridFunction.zeros(phi.ambient, bins)

    rng = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)
    cdf = np.cumsum(values)
    cdf /= cdf[-1]
    cells = np.minimum(np.searchsorted(cdf, rng.random(samples), side="right"), phi.n - 1)
    points = (cells + rng.random(samples)) * phi.h
    images = system.coarse_map_array(points)

    length = float(phi.ambient)
    counts, _ = np.histogram(images, bins=bins, range=(0.0, length))
    return GridFunction(phi.ambient, counts / samples / (length / bins) * mass)


def pf_matrix_representation(
    system: BranchingSystem,
    n_block: Optional[int] = None,
    cells: Optional[int] = None,
    tol: float = 1e-12,
) -> MatrixRepresentationReport:
    """
    Matrix of P_F on span{chi_{R_i}}: entry (j, z) = b_z A(z, j) with b_z the
    constant derivative of f_z.

    Each column is checked against pf_apply(chi_{R_z}) on the grid; the L1 gap is
    recorded in ``column_residuals``.

    Raises:
        RowNotFiniteError: a row z <= n_block has infinitely many ones
        NonconstantDerivativeError: f_z has a varying derivative
    """
    n_block = system.n_max if n_block is None else n_block
    if not 1 <= n_block <= system.n_max:
        raise ValueError(f"Block size {n_block} is outside 1..{system.n_max}")
    cells = settings.DEFAULT_GRID_CELLS if cells is None else cells

    derivatives: List[Fraction] = []
    for z in range(1, n_block + 1):
        if not system.matrix.is_row_finite(z):
            raise RowNotFiniteError(z)
        b = system.branch(z).constant_derivative()
        if b is None:
            raise NonconstantDerivativeError(z)
        derivatives.append(b)

    entries = [
        [derivatives[z - 1] * system.matrix.entry(z, j) for z in range(1, n_block + 1)]
        for j in range(1, n_block + 1)
    ]

    residuals = []
    for z in range(1, n_block + 1):
        image = pf_apply(system, GridFunction.indicator(system.branch(z).range, cells))
        expected = np.zeros(cells)
        for j in range(1, system.n_max + 1):
            weight = derivatives[z - 1] * system.matrix.entry(z, j)
            if weight:
                expected += float(weight) * GridFunction.indicator(system.branch(j).range, cells).values
        residuals.append(image.distance_l1(image.with_values(expected)))

    report = MatrixRepresentationReport(
        system=system.name,
        n_block=n_block,
        derivatives=[str(b) for b in derivatives],
        entries=[[str(q) for q in row] for row in entries],
        values=[[float(q) for q in row] for row in entries],
        column_residuals=residuals,
        tolerance=tol,
    )
    logger.info(f"Matrix representation of {system.name}: {n_block}x{n_block}, max column gap {max(residuals):.3e}")
    return report


def invariant_density(
    system: BranchingSystem,
    rho0: GridFunction,
    max_iters: int = 100,
    tol_l1: float = 1e-10,
    n: Optional[int] = None,
    rule: DerivativeRule = DerivativeRule.SECANT,
) -> InvariantDensityReport:
    """
    Iterate rho <- P_F rho / ||P_F rho||_1 until successive iterates are within tol_l1.

    Raises:
        ZeroMassError: if rho0 has zero mass
        NotConvergedError: after max_iters applications, carrying the last iterate
            and the error sequence
    """
    _checked_nonnegative(rho0)
    if rho0.norm_l1 <= 0:
        raise ZeroMassError("Initial density has zero mass")
    if abs(rho0.norm_l1 - 1.0) > 1e-9:
        raise ValueError(f"Initial density must have unit mass, got {rho0.norm_l1:.12g}")

    rho = rho0
    errors: List[float] = []
    for k in range(1, max_iters + 1):
        image = pf_apply(system, rho, n, rule)
        mass = image.norm_l1
        if mass <= 0:
            raise ZeroMassError(f"Iterate {k} has zero mass")
        image = image / mass
        errors.append(image.distance_l1(rho))
        rho = image
        logger.debug(f"invariant density iteration {k}: L1 change {errors[-1]:.3e}")
        if errors[-1] <= tol_l1:
            logger.info(f"Invariant density of {system.name} converged after {k} iterations")
            return InvariantDensityReport(
                system=system.name,
                converged=True,
                iterations=k,
                errors=errors,
                tol_l1=tol_l1,
                max_iters=max_iters,
                density=rho,
            )
    raise NotConvergedError(rho, errors)


def truncation_study(
    system: BranchingSystem,
    phi: GridFunction,
    ns: Sequence[int],
    rule: DerivativeRule = DerivativeRule.SECANT,
    test_intervals: int = 8,
) -> PFReport:
    """
    Partial sums phi_N for N in ``ns`` with L1 distances to the largest-N sum.

    The input must vanish off the instantiated ranges (up to 1e-9 of mass);
    cells where a partial sum drops below its predecessor by more than 1e-12
    are counted as monotonicity violations.
    """
    values = _checked_nonnegative(phi)
    ns = sorted(set(ns))
    if not ns:
        raise ValueError("At least one truncation index is needed")
    for n in ns:
        _check_n(system, n)

    covered = system.ranges_union().contains_array(phi.midpoints)
    outside = phi.h * float(np.sum(values[~covered]))
    if outside > 1e-9:
        raise SupportViolationError(outside)

    sums = {n: pf_apply(system, phi, n, rule) for n in ns}
    reference = sums[ns[-1]]
    errors = {n: sums[n].distance_l1(reference) for n in ns}
    masses = {n: sums[n].integral() for n in ns}
    violations = sum(
        int(np.count_nonzero(sums[b].values < sums[a].values - NEGATIVE_SLACK)) for a, b in zip(ns, ns[1:])
    )
    report = PFReport(
        system=system.name,
        ns=ns,
        l1_errors=errors,
        masses=masses,
        defining_property_residuals=defining_residuals(system, phi, ns[-1], test_intervals, rule),
        monotonicity_violations=violations,
        partial_sums=sums,
    )
    logger.info(
        f"Truncation study on {system.name}: errors "
        + ", ".join(f"N={n}: {errors[n]:.3e}" for n in ns)
        + f"; {violations} monotonicity violations"
    )
    return report
