"""Level reduction built entirely from 3x3 inversions.

One reduction step eliminates every interior node of level k: each cluster's
3x3 interior block is inverted once, the resulting corner-corner corrections
are subtracted from the junction data, and the right-hand side collapses
onto the junction nodes. Repeating down to level 0 leaves a dense 3x3
system. The inverses are cached per level so the downward sweep, the
right-hand-side recursion, and the later upward weight recovery all reuse
them; matrices larger than 3x3 are never inverted anywhere on this path.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .covariance import (
    DEFAULT_CONFIG,
    BlockCovariance,
    RhsVector,
    ValidationConfig,
)
from .errors import (
    DimensionMismatch,
    FillOutsideMask,
    LevelOutOfRange,
    SingularInteriorBlock,
)

# process-wide tally of inversions performed, keyed by matrix size; purely
# diagnostic, but tests assert the recursive path never inverts anything
# larger than 3
_INVERSION_COUNTS: dict[int, int] = {}


def _count_inversions(size: int, amount: int) -> None:
    _INVERSION_COUNTS[size] = _INVERSION_COUNTS.get(size, 0) + amount


def inversion_counts() -> dict[int, int]:
    """Snapshot of {matrix size: inversions performed} since the last reset."""
    return dict(_INVERSION_COUNTS)


def reset_inversion_counts() -> None:
    _INVERSION_COUNTS.clear()


@dataclass(frozen=True)
class ChainLevel:
    """One rung of the chain: the matrix and right-hand side at one level."""

    cov: BlockCovariance
    rhs: RhsVector


@dataclass
class ReductionChain:
    """The full sequence of reduced matrices and right-hand sides.

    `entries[0]` is the input level; entries descend one level at a time to
    level 0. `inverted_blocks[k]` caches the (m,3,3) interior inverses of
    level k. `inversion_count` tallies the 3x3 inversions performed for
    this chain (the base solve, when it happens, adds one).
    """

    entries: list[ChainLevel]
    inverted_blocks: dict[int, np.ndarray]
    inversion_count: int = 0
    base_solution: np.ndarray | None = None

    @property
    def top_level(self) -> int:
        return self.entries[0].cov.level

    def cov_at(self, level: int) -> BlockCovariance:
        return self._entry(level).cov

    def rhs_at(self, level: int) -> np.ndarray:
        return self._entry(level).rhs.values

    def inverses_at(self, level: int) -> np.ndarray:
        if level not in self.inverted_blocks:
            raise LevelOutOfRange(f"no cached inverses for level {level}")
        return self.inverted_blocks[level]

    def _entry(self, level: int) -> ChainLevel:
        top = self.top_level
        if not 0 <= level <= top:
            raise LevelOutOfRange(f"chain covers levels {top}..0, not {level}")
        return self.entries[top - level]


def invert_interior_blocks(cov: BlockCovariance,
                           config: ValidationConfig | None = None
                           ) -> tuple[np.ndarray, np.ndarray]:
    """Invert every cluster's interior block; returns (inverses, minors).

    minors[c] holds the three leading principal minors of block c (the
    running determinants whose ratios are the factorization pivots).
    """
    config = config or DEFAULT_CONFIG
    if cov.level < 1:
        raise LevelOutOfRange("interior blocks exist for level >= 1")
    m = cov.interior_blocks.shape[0]
    inverses = np.empty((m, 3, 3))
    minors = np.empty((m, 3))
    bad = kernels.impl().invert_blocks(
        cov.interior_blocks, config.pd_tol, inverses, minors
    )
    _count_inversions(3, m if bad < 0 else bad)
    if bad >= 0:
        raise SingularInteriorBlock(cov.level, bad)
    return inverses, minors


def schur_complement(cov: BlockCovariance,
                     config: ValidationConfig | None = None,
                     inverses: np.ndarray | None = None) -> BlockCovariance:
    """Collapse level k onto its junction nodes: T minus the corner-corner

    corrections C B^-1 C^T of every cluster, re-partitioned into the
    level-(k-1) block structure. Only 3x3 inversions are performed, and
    none at all when cached `inverses` are supplied.
    """
    if cov.level < 1:
        raise LevelOutOfRange("schur_complement requires level >= 1")
    if inverses is None:
        inverses, _ = invert_interior_blocks(cov, config)
    impl = kernels.impl()
    template = cov.template
    level = cov.level
    m = template.cluster_count(level)
    corrections = np.empty((m, 3, 3))
    impl.schur_corrections(cov.coupling_blocks, inverses, corrections)
    corners = template.corners_array(level)
    next_level = level - 1
    if next_level == 0:
        dense = np.zeros((3, 3))
        np.fill_diagonal(dense, cov.junction_diag)
        impl.route_corrections_base(corners, corrections, dense)
        return BlockCovariance.base_level(dense, template)
    nj2 = template.junction_count(next_level)
    m2 = template.cluster_count(next_level)
    out_junction_diag = cov.junction_diag[:nj2].copy()
    out_interior = np.zeros((m2, 3, 3))
    rng3 = np.arange(3)
    out_interior[:, rng3, rng3] = cov.junction_diag[nj2:].reshape(m2, 3)
    out_coupling = np.zeros((m2, 3, 3))
    violation = np.zeros(2, dtype=np.int64)
    status = impl.route_corrections(
        corners, corrections, nj2, template.corners_array(next_level),
        out_junction_diag, out_interior, out_coupling, violation,
    )
    if status != 0:
        raise FillOutsideMask(int(violation[0]), int(violation[1]), next_level)
    return BlockCovariance.from_blocks(
        template, next_level, out_junction_diag, out_interior, out_coupling
    )


def reduce_rhs(cov: BlockCovariance, y,
               inverses: np.ndarray | None = None,
               config: ValidationConfig | None = None) -> np.ndarray:
    """Collapse a level-k right-hand side onto the junction nodes.

    Returns y_jun - C^T B^-1 y_int accumulated per cluster, which is the
    right-hand side the reduced level must solve so that the interior part
    stays recoverable.
    """
    if cov.level < 1:
        raise LevelOutOfRange("reduce_rhs requires level >= 1")
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.shape != (cov.n,):
        raise DimensionMismatch(f"level-{cov.level} vector must have length {cov.n}")
    if inverses is None:
        inverses, _ = invert_interior_blocks(cov, config)
    nj = cov.template.junction_count(cov.level)
    out = np.empty(nj)
    kernels.impl().reduce_rhs(
        y[:nj], y[nj:].reshape(-1, 3), cov.coupling_blocks, inverses,
        cov.template.corners_array(cov.level), out,
    )
    return out


def back_substitute(cov: BlockCovariance, junction_values, y,
                    inverses: np.ndarray | None = None,
                    config: ValidationConfig | None = None) -> np.ndarray:
    """Recover the interior values of level k from solved junction values.

    Per cluster: B^-1 (y_int - C^T v restricted to the corners). Returns
    the flat interior vector (one triple per cluster, cluster order).
    """
    if cov.level < 1:
        raise LevelOutOfRange("back_substitute requires level >= 1")
    junction_values = np.ascontiguousarray(junction_values, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    nj = cov.template.junction_count(cov.level)
    if junction_values.shape != (nj,):
        raise DimensionMismatch(f"junction vector must have length {nj}")
    if y.shape != (cov.n,):
        raise DimensionMismatch(f"level-{cov.level} vector must have length {cov.n}")
    if inverses is None:
        inverses, _ = invert_interior_blocks(cov, config)
    m = cov.template.cluster_count(cov.level)
    out = np.empty((m, 3))
    kernels.impl().back_substitute(
        junction_values, y[nj:].reshape(-1, 3), cov.coupling_blocks,
        inverses, cov.template.corners_array(cov.level), out,
    )
    return out.ravel()


def build_chain(cov: BlockCovariance,
                config: ValidationConfig | None = None) -> ReductionChain:
    """Run the full downward sweep from the input level to level 0.

    The right-hand side starts as all ones (the minimum-variance objective)
    and is collapsed alongside the matrix. Interior inverses are computed
    once per level and cached for reuse by the upward weight recovery, so
    the total inversion work is exactly one 3x3 per cluster.
    """
    config = config or DEFAULT_CONFIG
    entries = [ChainLevel(cov=cov, rhs=RhsVector(cov.level, np.ones(cov.n)))]
    inverted: dict[int, np.ndarray] = {}
    count = 0
    current = cov
    rhs = entries[0].rhs.values
    while current.level >= 1:
        inverses, _ = invert_interior_blocks(current, config)
        inverted[current.level] = inverses
        count += current.template.cluster_count(current.level)
        reduced = schur_complement(current, config, inverses=inverses)
        rhs = reduce_rhs(current, rhs, inverses=inverses)
        entries.append(ChainLevel(cov=reduced, rhs=RhsVector(reduced.level, rhs)))
        current = reduced
    return ReductionChain(entries=entries, inverted_blocks=inverted,
                          inversion_count=count)


def solve_base(matrix: np.ndarray, rhs: np.ndarray,
               config: ValidationConfig | None = None) -> np.ndarray:
    """Solve the dense 3x3 base system via the same instrumented kernel.

    Counts as one more 3x3 inversion; raises SingularBaseMatrix when the
    determinant falls below the relative cutoff.
    """
    from .errors import SingularBaseMatrix

    config = config or DEFAULT_CONFIG
    matrix = np.ascontiguousarray(matrix, dtype=np.float64).reshape(1, 3, 3)
    inverse = np.empty((1, 3, 3))
    minors = np.empty((1, 3))
    bad = kernels.impl().invert_blocks(matrix, config.pd_tol, inverse, minors)
    _count_inversions(3, 1 if bad < 0 else 0)
    if bad >= 0:
        raise SingularBaseMatrix("base 3x3 matrix is numerically singular")
    return inverse[0] @ np.asarray(rhs, dtype=np.float64)


def pivot_walk_is_pd(cov: BlockCovariance, threshold: float) -> bool:
    """Positive-definiteness via the hierarchical factorization pivots.

    Eliminating interiors level by level makes the pivots of a symmetric
    factorization available as ratios of each cluster block's leading
    minors plus the base-matrix minors; all must exceed the threshold.
    Runs in time linear in the matrix size and never raises.
    """
    current = cov
    while current.level >= 1:
        m = current.interior_blocks.shape[0]
        inverses = np.empty((m, 3, 3))
        minors = np.empty((m, 3))
        bad = kernels.impl().invert_blocks(
            current.interior_blocks, 0.0, inverses, minors
        )
        _count_inversions(3, m if bad < 0 else bad)
        if bad >= 0:
            return False
        if not _minor_pivots_pass(minors, threshold):
            return False
        try:
            current = schur_complement(current, inverses=inverses)
        except FillOutsideMask:
            return False
    base_minors = np.empty((1, 3))
    base_inv = np.empty((1, 3, 3))
    bad = kernels.impl().invert_blocks(
        np.ascontiguousarray(current.base).reshape(1, 3, 3), 0.0,
        base_inv, base_minors,
    )
    _count_inversions(3, 1 if bad < 0 else 0)
    if bad >= 0:
        return False
    return _minor_pivots_pass(base_minors, threshold)


def _minor_pivots_pass(minors: np.ndarray, threshold: float) -> bool:
    d1 = minors[:, 0]
    if not (d1 > threshold).all():
        return False
    p2 = minors[:, 1] / d1
    if not (p2 > threshold).all():
        return False
    p3 = minors[:, 2] / minors[:, 1]
    return bool((p3 > threshold).all())
