"""Independent dense baseline for equivalence testing and benchmarks.

Everything here works on plain dense symmetric matrices with no knowledge
of the hierarchy, and shares no code with the recursive kernels: the
factorization is a hand-written symmetric LDL^T with diagonal pivoting
(blocked right-looking elimination; numpy supplies only the array
arithmetic, never a factor or solve). Agreement between this path and the
recursive one is therefore evidence, not tautology.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import DEFAULT_CONFIG, ValidationConfig
from .errors import (
    DimensionMismatch,
    NotPositiveDefinite,
    NotSymmetric,
    SingularTrailingBlock,
)

PANEL = 96


@dataclass(frozen=True)
class OracleResult:
    weights: np.ndarray
    total_variance: float
    condition_estimate: float


def ldlt_factor(matrix, pivot_tol: float | None = None, require_pd: bool = True,
                check: bool = False):
    """Symmetric LDL^T factorization with diagonal (max-magnitude) pivoting.

    Returns (lower, pivots, perm) with matrix[perm][:, perm] = L D L^T,
    L unit lower triangular. Elimination is blocked: panels of up to PANEL
    columns are factored with rank-1 logic, then the trailing block takes
    one matrix-multiply update, which keeps large instances tractable
    without changing the arithmetic's meaning.

    The pivot threshold defaults to pd_tol times the largest diagonal
    magnitude. With require_pd, a pivot at or below the threshold raises
    NotPositiveDefinite; otherwise pivots only need magnitude above the
    threshold (diagonal pivoting cannot handle genuinely indefinite
    matrices with a zero diagonal; covariance work never produces those).

    With check=True the factorization verifies its own reconstruction
    against the input before returning.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch("ldlt_factor needs a square matrix")
    n = a.shape[0]
    if pivot_tol is None:
        scale = float(np.abs(np.diag(a)).max()) if n else 0.0
        pivot_tol = DEFAULT_CONFIG.pd_tol * scale
    original = a.copy() if check else None
    pivots = np.empty(n)
    perm = np.arange(n)
    for k0 in range(0, n, PANEL):
        k1 = min(k0 + PANEL, n)
        # updated diagonal of the trailing block, maintained across the panel
        dcur = a.diagonal().copy()
        for k in range(k0, k1):
            j = k + int(np.argmax(np.abs(dcur[k:])))
            if j != k:
                a[[k, j], :] = a[[j, k], :]
                a[:, [k, j]] = a[:, [j, k]]
                dcur[[k, j]] = dcur[[j, k]]
                perm[[k, j]] = perm[[j, k]]
            column = a[k:, k] - a[k:, k0:k] @ (pivots[k0:k] * a[k, k0:k])
            pivot = column[0]
            if require_pd:
                if not pivot > pivot_tol:
                    raise NotPositiveDefinite(
                        f"factorization pivot {pivot:g} at step {k} is not "
                        f"above the threshold {pivot_tol:g}"
                    )
            elif not abs(pivot) > pivot_tol:
                raise SingularTrailingBlock(
                    f"factorization pivot magnitude {abs(pivot):g} at step {k} "
                    f"is not above the threshold {pivot_tol:g}"
                )
            pivots[k] = pivot
            a[k + 1:, k] = column[1:] / pivot
            dcur[k + 1:] -= pivot * a[k + 1:, k] ** 2
        if k1 < n:
            panel = a[k1:, k0:k1]
            a[k1:, k1:] -= (panel * pivots[k0:k1]) @ panel.T
    lower = np.tril(a, -1)
    np.fill_diagonal(lower, 1.0)
    if check:
        permuted = original[np.ix_(perm, perm)]
        residual = np.abs((lower * pivots) @ lower.T - permuted).max()
        bound = 1e-12 * max(np.abs(original).max(), 1e-300) * n
        if residual > bound:
            raise ArithmeticError(
                f"factorization self-check failed: residual {residual:g} "
                f"above bound {bound:g}"
            )
    return lower, pivots, perm


def ldlt_solve(lower, pivots, perm, rhs) -> np.ndarray:
    """Solve using an ldlt_factor result; rhs may be a vector or matrix."""
    rhs = np.asarray(rhs, dtype=np.float64)
    single = rhs.ndim == 1
    b = rhs.reshape(len(rhs), -1)[perm].copy()
    n = b.shape[0]
    for i in range(1, n):
        b[i] -= lower[i, :i] @ b[:i]
    b /= pivots[:, None]
    for i in range(n - 2, -1, -1):
        b[i] -= lower[i + 1:, i] @ b[i + 1:]
    out = np.empty_like(b)
    out[perm] = b
    return out[:, 0] if single else out


def dense_min_variance(matrix, config: ValidationConfig | None = None,
                       check: bool = False) -> OracleResult:
    """Minimum-variance weights by direct dense factorization.

    Solves the full system against ones and rescales; the total variance is
    the reciprocal of the solution's sum. The condition estimate is the
    ratio of extreme factorization pivots.
    """
    config = config or DEFAULT_CONFIG
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch("dense_min_variance needs a square matrix")
    asym = np.abs(matrix - matrix.T)
    if asym.size and asym.max() > config.zero_tol:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise NotSymmetric(
            f"matrix is not symmetric: entries ({i},{j}) and ({j},{i}) "
            f"differ by {asym[i, j]:g}"
        )
    scale = float(np.abs(np.diag(matrix)).max()) if matrix.shape[0] else 0.0
    lower, pivots, perm = ldlt_factor(
        matrix, pivot_tol=config.pd_tol * scale, require_pd=True, check=check
    )
    x = ldlt_solve(lower, pivots, perm, np.ones(matrix.shape[0]))
    normalizer = float(x.sum())
    if normalizer == 0.0:
        raise NotPositiveDefinite("solution against ones sums to zero")
    return OracleResult(
        weights=x / normalizer,
        total_variance=1.0 / normalizer,
        condition_estimate=float(pivots.max() / pivots.min()),
    )


def dense_schur(matrix, junction_size: int,
                config: ValidationConfig | None = None) -> np.ndarray:
    """Schur complement onto the leading junction_size nodes, densely.

    No hierarchy knowledge: factor the trailing block, solve it against the
    couplings, subtract. Output is symmetrized (the exact result is
    symmetric; solving introduces roundoff asymmetry).
    """
    config = config or DEFAULT_CONFIG
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatch("dense_schur needs a square matrix")
    n = matrix.shape[0]
    if not 1 <= junction_size < n:
        raise DimensionMismatch(
            f"junction_size must be in [1, {n - 1}], got {junction_size}"
        )
    leading = matrix[:junction_size, :junction_size]
    couplings = matrix[junction_size:, :junction_size]
    trailing = matrix[junction_size:, junction_size:]
    scale = float(np.abs(trailing).max())
    lower, pivots, perm = ldlt_factor(
        trailing, pivot_tol=config.pd_tol * scale, require_pd=False
    )
    solved = ldlt_solve(lower, pivots, perm, couplings)
    reduced = leading - couplings.T @ solved
    return 0.5 * (reduced + reduced.T)
