"""Block storage for covariance matrices conforming to the hierarchy.

A level-k matrix splits as [[T, C^T], [C, X]]: T diagonal on the junction
nodes, X block-diagonal with one symmetric 3x3 block per cluster, and C
holding each cluster's corner-interior couplings. Level 0 is a dense
symmetric 3x3 with no split. The block form is what the reduction kernels
consume; `from_dense` is the validating ingest path and `to_dense` its exact
inverse.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    LevelOutOfRange,
    NonPositiveDiagonal,
    NotSymmetric,
    SparsityViolation,
)
from .hierarchy import HierarchyTemplate, template_for


@dataclass(frozen=True)
class ValidationConfig:
    """Numeric tolerances for ingest and solvability checks.

    zero_tol: entries at or below this magnitude count as structural zeros.
    pd_tol: relative pivot threshold for positive-definiteness, scaled by
        the matrix's max diagonal entry; also scales the 3x3 determinant
        cutoff in the reduction kernels.
    strict_mask: validate against the exact refined-triangle edge pattern
        instead of the permissive within-cluster pattern.
    """

    zero_tol: float = 1e-12
    pd_tol: float = 1e-10
    strict_mask: bool = False

    def __post_init__(self):
        if not self.zero_tol >= 0:
            raise ValueError(f"zero_tol must be >= 0, got {self.zero_tol}")
        if not self.pd_tol >= 0:
            raise ValueError(f"pd_tol must be >= 0, got {self.pd_tol}")


DEFAULT_CONFIG = ValidationConfig()


@dataclass(frozen=True)
class RhsVector:
    """A right-hand-side vector aligned to the nodes of one level."""

    level: int
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        expected = template_for(self.level).node_count(self.level)
        if values.ndim != 1 or values.shape[0] != expected:
            raise DimensionMismatch(
                f"level-{self.level} vector must have length {expected}, "
                f"got shape {np.shape(self.values)}"
            )
        object.__setattr__(self, "values", values)


@dataclass
class BlockCovariance:
    """A covariance matrix in hierarchical block form.

    For level >= 1: `junction_diag` (nj,), `interior_blocks` (m,3,3) and
    `coupling_blocks` (m,3,3) with entry (r, s) = covariance between corner
    r and interior s; `base` is None. For level 0 only `base` (3,3) is set.
    `junction_fill` is a defensive bucket for junction-junction corrections:
    reduction of a well-formed matrix can never produce any (fill stays
    inside cluster triangles), so validation treats a nonempty bucket as an
    internal-consistency failure rather than silently dropping values.

    Instances are treated as immutable after construction.
    """

    template: HierarchyTemplate
    level: int
    junction_diag: np.ndarray | None = None
    interior_blocks: np.ndarray | None = None
    coupling_blocks: np.ndarray | None = None
    base: np.ndarray | None = None
    junction_fill: dict[tuple[int, int], float] = field(default_factory=dict)

    @classmethod
    def from_blocks(cls, template, level, junction_diag, interior_blocks,
                    coupling_blocks, junction_fill=None) -> "BlockCovariance":
        """Build a level >= 1 instance from raw block arrays (shape-checked)."""
        if level < 1 or level > template.max_level:
            raise LevelOutOfRange(f"block form requires 1 <= level <= {template.max_level}")
        nj = template.junction_count(level)
        m = template.cluster_count(level)
        junction_diag = np.ascontiguousarray(junction_diag, dtype=np.float64)
        interior_blocks = np.ascontiguousarray(interior_blocks, dtype=np.float64)
        coupling_blocks = np.ascontiguousarray(coupling_blocks, dtype=np.float64)
        if junction_diag.shape != (nj,):
            raise DimensionMismatch(f"junction_diag must have shape ({nj},)")
        if interior_blocks.shape != (m, 3, 3):
            raise DimensionMismatch(f"interior_blocks must have shape ({m}, 3, 3)")
        if coupling_blocks.shape != (m, 3, 3):
            raise DimensionMismatch(f"coupling_blocks must have shape ({m}, 3, 3)")
        return cls(
            template=template,
            level=int(level),
            junction_diag=junction_diag,
            interior_blocks=interior_blocks,
            coupling_blocks=coupling_blocks,
            junction_fill=dict(junction_fill or {}),
        )

    @classmethod
    def base_level(cls, matrix, template=None) -> "BlockCovariance":
        """Wrap a dense symmetric 3x3 as the level-0 form."""
        matrix = np.ascontiguousarray(matrix, dtype=np.float64)
        if matrix.shape != (3, 3):
            raise DimensionMismatch("level-0 matrix must be 3x3")
        return cls(template=template or template_for(0), level=0, base=matrix)

    @property
    def n(self) -> int:
        return self.template.node_count(self.level)

    def diagonal(self) -> np.ndarray:
        """The full diagonal in node order."""
        if self.level == 0:
            return np.diag(self.base).copy()
        interiors = np.einsum("css->cs", self.interior_blocks).ravel()
        return np.concatenate([self.junction_diag, interiors])


def from_dense(matrix, template: HierarchyTemplate, level: int,
               config: ValidationConfig | None = None) -> BlockCovariance:
    """Validate a dense symmetric matrix and split it into block form.

    Checks, in order: dimensions; symmetry within zero_tol; sparsity (every
    entry above zero_tol must sit on the diagonal or inside the level's
    adjacency pattern, strict or permissive per config); strictly positive
    diagonal. The first offending entry in row-major order is reported.
    """
    config = config or DEFAULT_CONFIG
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    n = template.node_count(level)
    if matrix.ndim != 2 or matrix.shape != (n, n):
        raise DimensionMismatch(
            f"level {level} needs a {n}x{n} matrix, got shape {matrix.shape}"
        )
    asym = np.abs(matrix - matrix.T)
    if asym.size and asym.max() > config.zero_tol:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise NotSymmetric(
            f"matrix is not symmetric: entries ({i},{j}) and ({j},{i}) "
            f"differ by {asym[i, j]:g}"
        )
    allowed = template.adjacency_mask(level, strict=config.strict_mask)
    np.fill_diagonal(allowed, True)
    bad = (np.abs(matrix) > config.zero_tol) & ~allowed
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise SparsityViolation(i, j, matrix[i, j], level)
    diag = np.diag(matrix)
    if (diag <= 0).any():
        i = int(np.argmax(diag <= 0))
        raise NonPositiveDiagonal(
            f"diagonal entry {i} is {diag[i]:g}; variances must be positive"
        )
    if level == 0:
        return BlockCovariance.base_level(matrix.copy(), template)
    nj = template.junction_count(level)
    m = template.cluster_count(level)
    corners = template.corners_array(level)
    interior = matrix[nj:, nj:]
    interior_blocks = np.empty((m, 3, 3))
    coupling_blocks = np.empty((m, 3, 3))
    for c in range(m):
        sl = slice(3 * c, 3 * c + 3)
        interior_blocks[c] = interior[sl, sl]
        coupling_blocks[c] = matrix[corners[c], nj + 3 * c: nj + 3 * c + 3]
    return BlockCovariance.from_blocks(
        template, level, diag[:nj].copy(), interior_blocks, coupling_blocks
    )


def to_dense(cov: BlockCovariance) -> np.ndarray:
    """Assemble the dense symmetric matrix; exact inverse of from_dense."""
    if cov.level == 0:
        return cov.base.copy()
    n = cov.n
    nj = cov.template.junction_count(cov.level)
    corners = cov.template.corners_array(cov.level)
    out = np.zeros((n, n))
    out[np.arange(nj), np.arange(nj)] = cov.junction_diag
    for c in range(cov.template.cluster_count(cov.level)):
        ii = np.arange(nj + 3 * c, nj + 3 * c + 3)
        out[np.ix_(ii, ii)] = cov.interior_blocks[c]
        out[np.ix_(corners[c], ii)] = cov.coupling_blocks[c]
        out[np.ix_(ii, corners[c])] = cov.coupling_blocks[c].T
    for (i, j), value in cov.junction_fill.items():
        out[i, j] = value
        out[j, i] = value
    return out


def partition(level: int, y) -> tuple[np.ndarray, np.ndarray]:
    """Split a level-k vector into (junction part, interior part); k >= 1."""
    if level < 1:
        raise LevelOutOfRange("partition requires level >= 1")
    y = np.asarray(y, dtype=np.float64)
    tpl = template_for(level)
    n = tpl.node_count(level)
    if y.ndim != 1 or y.shape[0] != n:
        raise DimensionMismatch(f"level-{level} vector must have length {n}")
    nj = tpl.junction_count(level)
    return y[:nj].copy(), y[nj:].copy()


def matvec(cov: BlockCovariance, x) -> np.ndarray:
    """Multiply the block-form matrix by a vector (no densification)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (cov.n,):
        raise DimensionMismatch(f"vector must have length {cov.n}")
    if cov.level == 0:
        return cov.base @ x
    nj = cov.template.junction_count(cov.level)
    corners = cov.template.corners_array(cov.level)
    x_jun = x[:nj]
    x_int = x[nj:].reshape(-1, 3)
    out_jun = cov.junction_diag * x_jun
    np.add.at(
        out_jun,
        corners.ravel(),
        np.einsum("crs,cs->cr", cov.coupling_blocks, x_int).ravel(),
    )
    out_int = np.einsum("crs,cr->cs", cov.coupling_blocks, x_jun[corners])
    out_int += np.einsum("cst,ct->cs", cov.interior_blocks, x_int)
    out = np.concatenate([out_jun, out_int.ravel()])
    if cov.junction_fill:
        for (i, j), value in cov.junction_fill.items():
            out[i] += value * x[j]
            out[j] += value * x[i]
    return out


def quad_form(cov: BlockCovariance, x) -> float:
    """The quadratic form x^T M x in block arithmetic."""
    x = np.asarray(x, dtype=np.float64)
    return float(x @ matvec(cov, x))


def is_positive_definite(cov: BlockCovariance, tol: float | None = None) -> bool:
    """True iff the assembled matrix admits a factorization with all pivots

    above the threshold. The check never densifies: it walks the reduction
    chain, reading the pivots of each cluster block off its leading minors
    and finishing on the 3x3 base, so the cost is linear in matrix size.
    The default threshold is 1e-10 times the max diagonal entry.
    """
    if tol is None:
        diag = cov.diagonal()
        tol = DEFAULT_CONFIG.pd_tol * float(diag.max()) if diag.size else 0.0
    from . import reduction

    return reduction.pivot_walk_is_pd(cov, tol)


def validate_structure(cov: BlockCovariance, config: ValidationConfig | None = None) -> None:
    """Raise if the block data itself is malformed.

    Checks exact symmetry of interior blocks, strictly positive variances,
    and an empty junction-fill bucket. Cheap (linear); used on reduction
    outputs where dense-path validation would defeat the point.
    """
    from .errors import FillOutsideMask

    if cov.junction_fill:
        (i, j) = next(iter(cov.junction_fill))
        raise FillOutsideMask(i, j, cov.level)
    if cov.level == 0:
        if not np.array_equal(cov.base, cov.base.T):
            raise NotSymmetric("base matrix is not exactly symmetric")
        if (np.diag(cov.base) <= 0).any():
            raise NonPositiveDiagonal("base matrix has a non-positive variance")
        return
    if not np.array_equal(cov.interior_blocks, cov.interior_blocks.transpose(0, 2, 1)):
        raise NotSymmetric("an interior block is not exactly symmetric")
    if (cov.junction_diag <= 0).any():
        raise NonPositiveDiagonal("a junction variance is not positive")
    if (np.einsum("css->cs", cov.interior_blocks) <= 0).any():
        raise NonPositiveDiagonal("an interior variance is not positive")
