"""Minimum-variance portfolios on hierarchically structured covariance matrices.

The core idea: when a covariance matrix conforms to a recursively refined
triangle graph, the linear solve behind the minimum-variance portfolio
factors into one Schur-complement step per hierarchy level, each touching
only 3x3 interior blocks. Everything here is built around that reduction:
block storage, the level-by-level chain, the solver on top of it, a dense
oracle for cross-checking, a conforming-instance generator, and a CLI.
"""
from . import errors, kernels
from .covariance import (
    BlockCovariance,
    RhsVector,
    ValidationConfig,
    from_dense,
    is_positive_definite,
    matvec,
    partition,
    quad_form,
    to_dense,
    validate_structure,
)
from .generator import GeneratorConfig, generate, reference_instance, reference_matrix
from .hierarchy import (
    CORNER_SLOT_NEIGHBORS,
    Cluster,
    Family,
    HierarchyTemplate,
    NodeAddress,
    NodeKind,
    template_for,
)
from .oracle import OracleResult, dense_min_variance, dense_schur, ldlt_factor, ldlt_solve
from .reduction import (
    ChainLevel,
    ReductionChain,
    back_substitute,
    build_chain,
    inversion_counts,
    pivot_walk_is_pd,
    reduce_rhs,
    reset_inversion_counts,
    schur_complement,
)
from .solver import (
    LevelVariance,
    PortfolioReport,
    WeightVector,
    compute_weights,
    normalize,
    portfolio_return,
    solve_min_variance,
    variance_decomposition_general,
    variance_report,
)

__version__ = "0.1.0"

__all__ = [
    "BlockCovariance",
    "ChainLevel",
    "Cluster",
    "CORNER_SLOT_NEIGHBORS",
    "Family",
    "GeneratorConfig",
    "HierarchyTemplate",
    "LevelVariance",
    "NodeAddress",
    "NodeKind",
    "OracleResult",
    "PortfolioReport",
    "ReductionChain",
    "RhsVector",
    "ValidationConfig",
    "WeightVector",
    "back_substitute",
    "build_chain",
    "compute_weights",
    "dense_min_variance",
    "dense_schur",
    "errors",
    "from_dense",
    "generate",
    "inversion_counts",
    "is_positive_definite",
    "kernels",
    "ldlt_factor",
    "ldlt_solve",
    "matvec",
    "normalize",
    "partition",
    "pivot_walk_is_pd",
    "portfolio_return",
    "quad_form",
    "reduce_rhs",
    "reference_instance",
    "reference_matrix",
    "reset_inversion_counts",
    "schur_complement",
    "solve_min_variance",
    "template_for",
    "to_dense",
    "validate_structure",
    "variance_decomposition_general",
    "variance_report",
    "__version__",
]
