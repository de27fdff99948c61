"""Checks of the six branching-system conditions and of the range-cover shortcut.

Failures are recorded in the returned reports; nothing here raises on a failed check.
"""

from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence

import numpy as np

from branchsys.core.logging_config import logger
from branchsys.models.branching import BranchingSystem
from branchsys.models.matrix import NOT_FINITELY_SUPPORTED, UVPair, default_uv_pairs, format_uv
from branchsys.models.sets import IntervalUnion, intersect_all, union_all
from branchsys.schemas.reports import (
    ConditionResult,
    Finding,
    LemmaReport,
    RowCheck,
    ValidationReport,
)

CONDITION_TITLES = {
    1: "pieces tile D_i and R_i",
    2: "F o f_i = id on D_i",
    3: "ranges pairwise disjoint",
    4: "ranges compatible with the matrix",
    5: "domains generated by ranges",
    6: "derivatives positive on piece interiors",
}


def _tiling_check(system: BranchingSystem) -> ConditionResult:
    findings = []
    for branch in system.branches:
        for side, total in (("source", branch.domain), ("target", branch.range)):
            parts = [
                IntervalUnion(system.ambient, (getattr(p, side),)) for p in branch.pieces
            ]
            covered = union_all(parts, system.ambient)
            overlap = sum((p.measure for p in parts), Fraction(0)) - covered.measure
            if overlap != 0 or not covered.ae_equal(total):
                findings.append(
                    Finding(
                        message=f"branch {branch.index}: piece {side}s do not tile "
                        f"{'D' if side == 'source' else 'R'}_{branch.index}",
                        pair=[branch.index],
                        measure=str(covered.symmetric_difference(total).measure + overlap),
                    )
                )
    return ConditionResult(condition=1, title=CONDITION_TITLES[1], passed=not findings, findings=findings)


def _round_trip_check(system: BranchingSystem, points: int, tol: float) -> ConditionResult:
    findings = []
    worst = 0.0
    for branch in system.branches:
        per_piece = max(1, points // len(branch.pieces))
        branch_worst = 0.0
        for piece in branch.pieces:
            lo, hi = float(piece.source.lo), float(piece.source.hi)
            t = lo + (np.arange(per_piece) + 0.5) * (hi - lo) / per_piece
            residual = np.abs(system.coarse_map_array(piece.forward(t)) - t)
            scale = np.maximum(1.0, np.abs(t))
            branch_worst = max(branch_worst, float(np.max(residual / scale)))
        worst = max(worst, branch_worst)
        if branch_worst > tol:
            findings.append(
                Finding(
                    message=f"branch {branch.index}: F(f_i(x)) differs from x",
                    pair=[branch.index],
                    residual=branch_worst,
                )
            )
    return ConditionResult(
        condition=2, title=CONDITION_TITLES[2], passed=not findings, max_residual=worst, findings=findings
    )


def _disjoint_ranges(system: BranchingSystem) -> List[Finding]:
    findings = []
    for a, b in combinations(system.branches, 2):
        overlap = (a.range & b.range).measure
        if overlap != 0:
            findings.append(
                Finding(
                    message=f"R_{a.index} and R_{b.index} overlap",
                    pair=[a.index, b.index],
                    measure=str(overlap),
                )
            )
    return findings


def _matrix_compatibility(system: BranchingSystem) -> ConditionResult:
    findings = []
    for i in range(1, system.n_max + 1):
        domain = system.branch(i).domain
        for j in range(1, system.n_max + 1):
            rng = system.branch(j).range
            if system.matrix.entry(i, j) == 0:
                bad = (rng & domain).measure
                text = f"A({i},{j}) = 0 but R_{j} meets D_{i}"
            else:
                bad = (rng - domain).measure
                text = f"A({i},{j}) = 1 but R_{j} is not inside D_{i}"
            if bad != 0:
                findings.append(Finding(message=text, pair=[i, j], measure=str(bad)))
    return ConditionResult(condition=4, title=CONDITION_TITLES[4], passed=not findings, findings=findings)


def _generated_domains(system: BranchingSystem, uv_pairs: Sequence[UVPair], report_lists: dict):
    findings = []
    checked = 0
    for pair in uv_pairs:
        U, V = pair
        support = system.matrix.support_uv(U, V)
        if support is NOT_FINITELY_SUPPORTED:
            report_lists["vacuous"].append(format_uv(pair))
            continue
        if any(j > system.n_max for j in support) or any(k > system.n_max for k in U | V):
            report_lists["truncated"].append(format_uv(pair))
            continue
        lhs = intersect_all((system.branch(u).domain for u in U), system.ambient)
        lhs = intersect_all((~system.branch(v).domain for v in V), system.ambient) & lhs
        rhs = union_all((system.branch(j).range for j in support), system.ambient)
        checked += 1
        if not lhs.ae_equal(rhs):
            findings.append(
                Finding(
                    message=f"{format_uv(pair)}: domain combination differs from the union of ranges",
                    measure=str(lhs.symmetric_difference(rhs).measure),
                )
            )
    notes = [f"{checked} (U, V) pairs checked"]
    return ConditionResult(
        condition=5, title=CONDITION_TITLES[5], passed=not findings, findings=findings, notes=notes
    )


def _derivative_check(system: BranchingSystem) -> ConditionResult:
    findings = [
        Finding(message=f"branch {b.index}: derivative vanishes inside a piece", pair=[b.index])
        for b in system.branches
        if not all(p.structural_derivative_ok() for p in b.pieces)
    ]
    return ConditionResult(condition=6, title=CONDITION_TITLES[6], passed=not findings, findings=findings)


def validate(
    system: BranchingSystem,
    grid_points_per_branch: int = 1000,
    uv_pairs: Optional[Sequence[UVPair]] = None,
    tol: float = 1e-10,
) -> ValidationReport:
    """
    Check the six branching-system conditions.

    Args:
        system: the system to check
        grid_points_per_branch: interior sample points for the F o f_i round trip
        uv_pairs: (U, V) pairs for condition 5; defaults to ``default_uv_pairs``
        tol: relative tolerance of the sampled round trip

    Returns:
        ValidationReport with one entry per condition
    """
    if uv_pairs is None:
        uv_pairs = default_uv_pairs(system.matrix, system.n_max)
    lists = {"vacuous": [], "truncated": []}

    overlaps = _disjoint_ranges(system)
    conditions = [
        _tiling_check(system),
        _round_trip_check(system, grid_points_per_branch, tol),
        ConditionResult(condition=3, title=CONDITION_TITLES[3], passed=not overlaps, findings=overlaps),
        _matrix_compatibility(system),
        _generated_domains(system, uv_pairs, lists),
        _derivative_check(system),
    ]
    report = ValidationReport(
        system=system.name,
        n_max=system.n_max,
        conditions=conditions,
        vacuous_pairs=lists["vacuous"],
        truncated_pairs=lists["truncated"],
    )

    for condition in conditions:
        for finding in condition.findings:
            logger.debug(f"condition {condition.condition}: {finding.message}")
    if report.passed:
        logger.info(f"System {system.name} satisfies all six conditions")
    else:
        logger.info(f"System {system.name} fails conditions {report.failed_conditions()}")
    return report


def lemma_check(system: BranchingSystem, cover_required: bool = False) -> LemmaReport:
    """
    Check the shortcut hypotheses: disjoint ranges, optional cover of X, and
    D_i = union of R_j over A(i, j) = 1 for row-finite rows.

    Conditions 4 and 5 are reported as implied only when every hypothesis holds
    and no row had to be skipped; a failed cover never counts as a failure of 4 or 5.
    """
    overlaps = _disjoint_ranges(system)
    cover = None
    uncovered = None
    if cover_required:
        gap = system.space - system.ranges_union()
        cover = gap.is_empty()
        uncovered = str(gap.measure)

    rows = []
    for i in range(1, system.n_max + 1):
        support = system.matrix.row_support(i)
        if support is None:
            rows.append(RowCheck(row=i, passed=None, skipped_reason="row has infinitely many ones"))
            continue
        if any(j > system.n_max for j in support):
            rows.append(RowCheck(row=i, passed=None, skipped_reason="row reaches past N_max"))
            continue
        generated = union_all((system.branch(j).range for j in support), system.ambient)
        rows.append(RowCheck(row=i, passed=system.branch(i).domain.ae_equal(generated)))

    rows_ok = all(r.passed for r in rows)
    implies_4 = not overlaps and rows_ok
    report = LemmaReport(
        system=system.name,
        ranges_disjoint=not overlaps,
        overlaps=overlaps,
        cover_required=cover_required,
        cover=cover,
        uncovered_measure=uncovered,
        rows=rows,
        implies_condition_4=implies_4,
        implies_condition_5=implies_4 and cover is not False,
    )
    logger.info(
        f"Lemma check on {system.name}: disjoint={report.ranges_disjoint}, cover={cover}, "
        f"rows pass={report.rows_pass}"
    )
    return report
