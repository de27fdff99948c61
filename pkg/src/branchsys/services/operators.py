"""Representation operators S_i, S_i* on grid functions and the relation checks.

(S_i phi)(x)  = chi_{R_i}(x) Phi_{f_i^{-1}}(x)^{1/2} phi(F(x))
(S_i* psi)(x) = chi_{D_i}(x) Phi_{f_i}(x)^{1/2} psi(f_i(x))

Compositions phi o F and psi o f_i are read by cell lookup at the mapped midpoint.
"""

from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from branchsys.core.config import settings
from branchsys.core.exceptions import AmbientMismatchError, GridMismatchError
from branchsys.core.logging_config import logger
from branchsys.models.branching import BranchingSystem, BranchPiece, DerivativeRule
from branchsys.models.grid import GridFunction, cell_midpoints, unaligned
from branchsys.models.matrix import NOT_FINITELY_SUPPORTED, UVPair, default_uv_pairs, format_uv
from branchsys.schemas.reports import RelationReport


@dataclass(frozen=True)
class Transport:
    """Cells reached by one operator, where each reads its input and with which weight."""

    cells: np.ndarray
    reads: np.ndarray
    weights: np.ndarray  # Radon-Nikodym derivative, not its square root


def _cell_weights(
    piece: BranchPiece, cells: np.ndarray, h: float, rule: DerivativeRule, inverse: bool
) -> np.ndarray:
    mids = (cells + 0.5) * h
    side = piece.target if inverse else piece.source
    if rule is DerivativeRule.MIDPOINT:
        return piece.inverse_derivative(mids) if inverse else piece.derivative(mids)
    lo = np.maximum(cells * h, float(side.lo))
    hi = np.minimum((cells + 1) * h, float(side.hi))
    if inverse:
        return piece.secant_inverse_derivative(lo, hi)
    return piece.secant_derivative(lo, hi)


def _merge(parts: List[Transport]) -> Transport:
    if not parts:
        empty = np.zeros(0, dtype=np.int64)
        return Transport(empty, empty, np.zeros(0))
    return Transport(
        np.concatenate([p.cells for p in parts]),
        np.concatenate([p.reads for p in parts]),
        np.concatenate([p.weights for p in parts]),
    )


class Representation:
    """
    The operators S_i and S_i* of one system on an n-cell grid.

    Transports are precomputed per branch, so each application is a gather and a
    scale over the cells of R_i or D_i.
    """

    def __init__(self, system: BranchingSystem, n: int, rule: DerivativeRule = DerivativeRule.SECANT):
        if n < 2:
            raise GridMismatchError(f"A grid needs at least 2 cells, got {n}")
        self.system = system
        self.n = n
        self.rule = DerivativeRule(rule)
        self.h = float(system.ambient) / n
        mids = cell_midpoints(system.ambient, n)
        coarse = system.coarse_map_array(mids)

        self._forward: Dict[int, Transport] = {}
        self._adjoint: Dict[int, Transport] = {}
        for branch in system.branches:
            forward_parts, adjoint_parts = [], []
            for piece in branch.pieces:
                in_target = np.flatnonzero(
                    (mids >= float(piece.target.lo)) & (mids < float(piece.target.hi))
                )
                if in_target.size:
                    forward_parts.append(
                        Transport(
                            in_target,
                            self._index(coarse[in_target]),
                            _cell_weights(piece, in_target, self.h, self.rule, inverse=True),
                        )
                    )
                in_source = np.flatnonzero(
                    (mids >= float(piece.source.lo)) & (mids < float(piece.source.hi))
                )
                if in_source.size:
                    adjoint_parts.append(
                        Transport(
                            in_source,
                            self._index(piece.forward(mids[in_source])),
                            _cell_weights(piece, in_source, self.h, self.rule, inverse=False),
                        )
                    )
            self._forward[branch.index] = _merge(forward_parts)
            self._adjoint[branch.index] = _merge(adjoint_parts)

        self._range_masks = {
            b.index: b.range.contains_array(mids).astype(float) for b in system.branches
        }
        self._domain_masks = {
            b.index: b.domain.contains_array(mids).astype(float) for b in system.branches
        }

    def _index(self, x: np.ndarray) -> np.ndarray:
        return np.clip(np.floor(x / self.h).astype(np.int64), 0, self.n - 1)

    def _check(self, fn: GridFunction) -> None:
        if fn.ambient != self.system.ambient:
            raise AmbientMismatchError(fn.ambient, self.system.ambient)
        if fn.n != self.n:
            raise GridMismatchError(f"Expected {self.n} cells, got {fn.n}")

    def transport(self, i: int, adjoint: bool) -> Transport:
        self.system.branch(i)
        return (self._adjoint if adjoint else self._forward)[i]

    def S(self, i: int, phi: GridFunction) -> GridFunction:
        self._check(phi)
        t = self.transport(i, adjoint=False)
        out = np.zeros(self.n)
        out[t.cells] = np.sqrt(t.weights) * phi.values[t.reads]
        return phi.with_values(out)

    def S_star(self, i: int, psi: GridFunction) -> GridFunction:
        self._check(psi)
        t = self.transport(i, adjoint=True)
        out = np.zeros(self.n)
        out[t.cells] = np.sqrt(t.weights) * psi.values[t.reads]
        return psi.with_values(out)

    # Projections, applied through the operators rather than by masks

    def source_projection(self, i: int, phi: GridFunction) -> GridFunction:
        """S_i* S_i phi."""
        return self.S_star(i, self.S(i, phi))

    def range_projection(self, i: int, phi: GridFunction) -> GridFunction:
        """S_i S_i* phi."""
        return self.S(i, self.S_star(i, phi))

    def range_indicator(self, i: int) -> np.ndarray:
        return self._range_masks[i]

    def domain_indicator(self, i: int) -> np.ndarray:
        return self._domain_masks[i]


@lru_cache(maxsize=16)
def representation(
    system: BranchingSystem, n: int, rule: DerivativeRule = DerivativeRule.SECANT
) -> Representation:
    """Cached ``Representation`` per (system, grid, rule)."""
    return Representation(system, n, DerivativeRule(rule))


def apply_S(
    system: BranchingSystem, i: int, phi: GridFunction, rule: DerivativeRule = DerivativeRule.SECANT
) -> GridFunction:
    return representation(system, phi.n, rule).S(i, phi)


def apply_S_star(
    system: BranchingSystem, i: int, psi: GridFunction, rule: DerivativeRule = DerivativeRule.SECANT
) -> GridFunction:
    return representation(system, psi.n, rule).S_star(i, psi)


def random_test_functions(
    system: BranchingSystem,
    count: int = 10,
    n: Optional[int] = None,
    seed: Optional[int] = None,
    blocks: Optional[int] = None,
) -> List[GridFunction]:
    """
    Seeded functions with values uniform in [-1, 1], constant on ``blocks`` equal runs of cells.

    A contraction merges neighbouring cells, so S_i* S_i reproduces a function on the
    grid only if it is resolved at the scale of the strongest contraction.
    """
    n = settings.DEFAULT_GRID_CELLS if n is None else n
    seed = settings.DEFAULT_SEED if seed is None else seed
    blocks = settings.DEFAULT_TEST_BLOCKS if blocks is None else blocks
    if blocks < 1 or n % blocks != 0:
        raise GridMismatchError(f"{n} cells cannot be split into {blocks} equal blocks")
    rng = np.random.default_rng(seed)
    coarse = rng.uniform(-1.0, 1.0, size=(count, blocks))
    return [GridFunction(system.ambient, np.repeat(row, n // blocks)) for row in coarse]


def unaligned_breakpoints(system: BranchingSystem, n: int) -> list:
    """Rational breakpoints of the system that are not edges of the n-cell grid."""
    return unaligned(system.breakpoints(), system.ambient, n)


def _norm(values: np.ndarray, h: float) -> float:
    return float(np.sqrt(h * np.sum(values * values)))


def partial_isometry_residuals(
    system: BranchingSystem,
    test_fns: Sequence[GridFunction],
    rule: DerivativeRule = DerivativeRule.SECANT,
) -> Dict[str, float]:
    """
    Worst residuals over branches and test functions of
    S_i* S_i - chi_{D_i}, S_i S_i* - chi_{R_i}, ||S_i phi||^2 - int_{D_i} phi^2
    and the adjoint pairing <S_i phi, psi> - <phi, S_i* psi>.
    """
    out = {"source_projection": 0.0, "range_projection": 0.0, "norm_identity": 0.0, "adjointness": 0.0}
    if not test_fns:
        return out
    rep = representation(system, test_fns[0].n, rule)
    h = rep.h
    for k, phi in enumerate(test_fns):
        psi = test_fns[(k + 1) % len(test_fns)]
        for i in range(1, system.n_max + 1):
            chi_d, chi_r = rep.domain_indicator(i), rep.range_indicator(i)
            s_phi = rep.S(i, phi)
            source = rep.S_star(i, s_phi).values - chi_d * phi.values
            rng = rep.range_projection(i, phi).values - chi_r * phi.values
            norm_gap = abs(s_phi.norm_l2**2 - h * float(np.sum(chi_d * phi.values**2)))
            pairing = abs(s_phi.inner(psi) - phi.inner(rep.S_star(i, psi)))
            out["source_projection"] = max(out["source_projection"], _norm(source, h))
            out["range_projection"] = max(out["range_projection"], _norm(rng, h))
            out["norm_identity"] = max(out["norm_identity"], norm_gap)
            out["adjointness"] = max(out["adjointness"], pairing)
    return out


def _relation_uv(rep: Representation, pair: UVPair, support, phi: GridFunction) -> np.ndarray:
    """(prod_u S_u*S_u prod_v (1 - S_v*S_v) - sum_j S_j S_j*) phi."""
    U, V = pair
    value = phi
    for v in sorted(V):
        value = value - rep.source_projection(v, value)
    for u in sorted(U):
        value = rep.source_projection(u, value)
    total = reduce(
        lambda acc, j: acc + rep.range_projection(j, phi).values, sorted(support), np.zeros(rep.n)
    )
    return value.values - total


def verify_ck_relations(
    system: BranchingSystem,
    test_fns: Sequence[GridFunction],
    uv_pairs: Optional[Sequence[UVPair]] = None,
    tol: float = 1e-9,
    rule: DerivativeRule = DerivativeRule.SECANT,
    uv_limit: int = 6,
) -> RelationReport:
    """
    Residual norms of the four generator relations over the test functions.

    1. S_i S_i* S_j S_j* = 0 for i != j
    2. S_i*S_i and S_j*S_j commute
    3. S_i*S_i S_j S_j* = A(i, j) S_j S_j*
    4. prod_U S_u*S_u prod_V (1 - S_v*S_v) = sum over A(U, V, j) = 1 of S_j S_j*

    Pairs (U, V) without a finite support are skipped and listed as vacuous; pairs
    whose support reaches past N_max are listed as truncated.
    """
    if uv_pairs is None:
        uv_pairs = default_uv_pairs(system.matrix, system.n_max, uv_limit)
    residuals = {"1": 0.0, "2": 0.0, "3": 0.0, "4": 0.0}
    worst: Dict[str, str] = {}
    vacuous, truncated, supports = [], [], []
    for pair in uv_pairs:
        support = system.matrix.support_uv(*pair)
        if support is NOT_FINITELY_SUPPORTED:
            vacuous.append(format_uv(pair))
        elif any(j > system.n_max for j in support) or any(k > system.n_max for k in pair[0] | pair[1]):
            truncated.append(format_uv(pair))
        else:
            supports.append((pair, support))

    def record(key: str, value: float, where: str) -> None:
        if value > residuals[key]:
            residuals[key] = value
            worst[key] = where

    if test_fns:
        rep = representation(system, test_fns[0].n, rule)
        indices = range(1, system.n_max + 1)
        for phi in test_fns:
            projections = {i: rep.range_projection(i, phi) for i in indices}
            sources = {i: rep.source_projection(i, phi) for i in indices}
            for i in indices:
                for j in indices:
                    where = f"i={i} j={j}"
                    if i != j:
                        r1 = rep.range_projection(i, projections[j]).values
                        record("1", _norm(r1, rep.h), where)
                    r2 = rep.source_projection(i, sources[j]) - rep.source_projection(j, sources[i])
                    record("2", r2.norm_l2, where)
                    r3 = (
                        rep.source_projection(i, projections[j]).values
                        - system.matrix.entry(i, j) * projections[j].values
                    )
                    record("3", _norm(r3, rep.h), where)
            for pair, support in supports:
                record("4", _norm(_relation_uv(rep, pair, support, phi), rep.h), format_uv(pair))

    report = RelationReport(
        system=system.name,
        test_functions=len(test_fns),
        tolerance=tol,
        max_residuals=residuals,
        worst_pairs=worst,
        partial_isometry=partial_isometry_residuals(system, test_fns, rule),
        vacuous_pairs=vacuous,
        truncated_pairs=truncated,
    )
    logger.info(
        f"Relations on {system.name}: max residuals "
        + ", ".join(f"({k}) {v:.3e}" for k, v in residuals.items())
    )
    if not report.passed:
        logger.info(f"Relations {report.failed_relations} exceed tolerance {tol:g}")
    return report
