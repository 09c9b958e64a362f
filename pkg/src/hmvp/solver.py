"""Minimum-variance weights from a reduction chain.

The optimum w* = (inverse covariance applied to ones), rescaled to sum to
one. The chain makes this a 3x3 solve at the base followed by per-cluster
interior completion on the way back up; the variance report exposes how the
total variance accumulates across levels.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import (
    BlockCovariance,
    ValidationConfig,
    matvec,
    partition,
    quad_form,
)
from .errors import DimensionMismatch, ZeroSum
from .hierarchy import template_for
from .reduction import (
    ReductionChain,
    back_substitute,
    invert_interior_blocks,
    schur_complement,
    solve_base,
)

ZERO_SUM_RTOL = 1e-14


@dataclass(frozen=True)
class WeightVector:
    """Portfolio weights on the nodes of one level.

    Entries may be negative (shorting is allowed). `normalized` marks
    whether the entries have been rescaled to sum to one.
    """

    level: int
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        expected = template_for(self.level).node_count(self.level)
        if values.ndim != 1 or values.shape[0] != expected:
            raise DimensionMismatch(
                f"level-{self.level} weights must have length {expected}, "
                f"got shape {np.shape(self.values)}"
            )
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class LevelVariance:
    """Variance split at one level of the chain (normalized units).

    junction_variance: the quadratic form of the reduced matrix one level
        down on the corresponding weight prefix.
    constant_term: the interior contribution released by eliminating this
        level, divided by the squared normalizer.
    Their sum is the quadratic form at this level; summing constant terms
    over all levels on top of the base variance gives the total.
    """

    level: int
    junction_variance: float
    constant_term: float


@dataclass(frozen=True)
class PortfolioReport:
    weights: WeightVector
    total_variance: float
    normalizer: float
    per_level: list[LevelVariance]
    diagnostics: dict


def compute_weights(chain: ReductionChain,
                    config: ValidationConfig | None = None) -> WeightVector:
    """Solve the chain bottom-up; returns the un-normalized weights.

    One 3x3 solve at the base, then one interior completion per level using
    the inverses cached during the downward sweep. The result satisfies the
    top-level system with all-ones right-hand side.
    """
    base = chain.cov_at(0)
    w = solve_base(base.base, chain.rhs_at(0), config)
    chain.inversion_count += 1
    chain.base_solution = w.copy()
    for level in range(1, chain.top_level + 1):
        cov = chain.cov_at(level)
        interior = back_substitute(
            cov, w, chain.rhs_at(level), inverses=chain.inverses_at(level)
        )
        w = np.concatenate([w, interior])
    return WeightVector(level=chain.top_level, values=w, normalized=False)


def normalize(weights: WeightVector) -> WeightVector:
    """Rescale weights to sum to one; scale-invariant in the input."""
    total = float(weights.values.sum())
    scale = float(np.abs(weights.values).sum())
    if abs(total) <= ZERO_SUM_RTOL * scale or scale == 0.0:
        raise ZeroSum(
            f"weight sum {total:g} is too small relative to magnitude {scale:g}"
        )
    return WeightVector(
        level=weights.level, values=weights.values / total, normalized=True
    )


def variance_report(chain: ReductionChain, w_star: WeightVector,
                    config: ValidationConfig | None = None) -> PortfolioReport:
    """Assemble the per-level variance decomposition for normalized weights.

    The normalizer (ones' quadratic form in the inverse covariance) is
    computed by telescoping the chain: the base solve contribution plus
    each level's interior term, all from cached inverses. The total
    variance is computed independently as the top-level quadratic form of
    w_star, so the (total variance = 1 / normalizer) identity is a real
    cross-check between two arithmetic routes, not a restatement.
    """
    if not w_star.normalized:
        raise ValueError("variance_report expects normalized weights")
    top = chain.top_level
    if w_star.values.shape != (chain.cov_at(top).n,):
        raise DimensionMismatch("weight vector does not match the chain's top level")
    constants_raw = {}
    for level in range(1, top + 1):
        rhs = chain.rhs_at(level)
        nj = chain.cov_at(level).template.junction_count(level)
        rhs_int = rhs[nj:].reshape(-1, 3)
        applied = np.einsum("cst,ct->cs", chain.inverses_at(level), rhs_int)
        constants_raw[level] = float(np.einsum("cs,cs->", rhs_int, applied))
    if chain.base_solution is None:
        base_w = solve_base(chain.cov_at(0).base, chain.rhs_at(0), config)
        chain.inversion_count += 1
        chain.base_solution = base_w.copy()
    base_quad = float(chain.rhs_at(0) @ chain.base_solution)
    normalizer = base_quad + sum(constants_raw.values())
    per_level = []
    for level in range(1, top + 1):
        prefix = w_star.values[: chain.cov_at(level - 1).n]
        junction_variance = quad_form(chain.cov_at(level - 1), prefix)
        per_level.append(
            LevelVariance(
                level=level,
                junction_variance=junction_variance,
                constant_term=constants_raw[level] / (normalizer * normalizer),
            )
        )
    total_variance = quad_form(chain.cov_at(top), w_star.values)
    residuals = []
    for level in range(0, top + 1):
        cov = chain.cov_at(level)
        w_level = normalizer * w_star.values[: cov.n]
        residual = np.abs(matvec(cov, w_level) - chain.rhs_at(level)).max()
        residuals.append(float(residual))
    return PortfolioReport(
        weights=w_star,
        total_variance=total_variance,
        normalizer=normalizer,
        per_level=per_level,
        diagnostics={"inversions": chain.inversion_count, "residuals": residuals},
    )


def variance_decomposition_general(cov: BlockCovariance, w, y,
                                   config: ValidationConfig | None = None
                                   ) -> tuple[float, float, float, float]:
    """Split w^T M w against an arbitrary probe vector y into four terms:

    the reduced-matrix quadratic form on the junction part, the interior
    quadratic form of y in the inverse blocks, the interior-block norm of
    the deviation between w's interior part and the completion implied by
    (w_jun, y), and twice y's overlap with that deviation. The four terms
    sum exactly to w^T M w; when w solves the system with right-hand side
    y, the last two vanish.
    """
    w = np.asarray(w, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if w.shape != (cov.n,) or y.shape != (cov.n,):
        raise DimensionMismatch(f"vectors must have length {cov.n}")
    inverses, _ = invert_interior_blocks(cov, config)
    reduced = schur_complement(cov, config, inverses=inverses)
    w_jun, w_int = partition(cov.level, w)
    _, y_int = partition(cov.level, y)
    term1 = quad_form(reduced, w_jun)
    y_blocks = y_int.reshape(-1, 3)
    term2 = float(np.einsum(
        "cs,cs->", y_blocks, np.einsum("cst,ct->cs", inverses, y_blocks)
    ))
    completion = back_substitute(cov, w_jun, y, inverses=inverses)
    deviation = (w_int - completion).reshape(-1, 3)
    applied = np.einsum("cst,ct->cs", cov.interior_blocks, deviation)
    term3 = float(np.einsum("cs,cs->", deviation, applied))
    term4 = 2.0 * float(np.einsum("cs,cs->", y_blocks, deviation))
    return term1, term2, term3, term4


def portfolio_return(weights: WeightVector, returns) -> float:
    """Expected portfolio return w^T r."""
    returns = np.asarray(returns, dtype=np.float64)
    if returns.shape != weights.values.shape:
        raise DimensionMismatch(
            f"returns length {returns.shape} does not match weights "
            f"{weights.values.shape}"
        )
    return float(weights.values @ returns)


def solve_min_variance(cov: BlockCovariance,
                       config: ValidationConfig | None = None
                       ) -> tuple[WeightVector, PortfolioReport]:
    """Full pipeline: chain, weights, normalization, variance report."""
    from .reduction import build_chain

    chain = build_chain(cov, config)
    w_star = normalize(compute_weights(chain, config))
    return w_star, variance_report(chain, w_star, config)
