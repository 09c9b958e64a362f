"""Random conforming instances and the built-in reference instance.

Instances are drawn directly in block form, so conformance to the hierarchy
is guaranteed by construction; positive definiteness is reached by halving
the couplings until the pivot check passes. The random source is Philox
(counter-based, versioned), so a (seed, config) pair reproduces the same
instance bit for bit on any platform. Draw order is part of the contract:
junction variances first, then interior factors, then couplings.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import BlockCovariance, is_positive_definite
from .errors import GenerationFailed, LevelOutOfRange
from .hierarchy import (
    CORNER_SLOT_NEIGHBORS,
    HierarchyTemplate,
    template_for,
)

DEFAULT_COUPLING = 0.35
MAX_RETRIES = 40


@dataclass(frozen=True)
class GeneratorConfig:
    """Parameters of one random instance.

    coupling_scale sets the corner-interior coupling magnitude relative to
    the geometric mean of the variances it connects (so 1.0 means
    correlation-strength couplings, usually indefinite before retries).
    integer_mode emits small-integer entries. strict_mask confines
    couplings to the refined-triangle edge pattern.
    """

    level: int
    seed: int
    coupling_scale: float = DEFAULT_COUPLING
    integer_mode: bool = False
    strict_mask: bool = False

    def __post_init__(self):
        if not isinstance(self.level, int) or self.level < 1:
            raise LevelOutOfRange(f"level must be an integer >= 1, got {self.level!r}")
        if not 0 <= self.coupling_scale <= 1:
            raise ValueError(
                f"coupling_scale must be in [0, 1], got {self.coupling_scale}"
            )
        if not isinstance(self.seed, int) or self.seed < 0 or self.seed >= 2 ** 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


def generate(config: GeneratorConfig,
             template: HierarchyTemplate | None = None,
             max_retries: int = MAX_RETRIES) -> BlockCovariance:
    """Draw a conforming positive-definite instance; deterministic in config.

    Interior blocks are factor models M M^T plus half the average variance
    on the diagonal, junction variances are positive draws, and couplings
    are scaled Gaussians (or small integers). If the assembled matrix fails
    the pivot check, couplings are halved (re-rounded in integer mode) and
    the check retried; after `max_retries` halvings GenerationFailed means
    the coupling scale is too aggressive for this seed.
    """
    template = template or HierarchyTemplate()
    if config.level > template.max_level:
        raise LevelOutOfRange(
            f"level {config.level} exceeds the template's max level "
            f"{template.max_level}"
        )
    level = config.level
    nj = template.junction_count(level)
    m = template.cluster_count(level)
    rng = np.random.Generator(np.random.Philox(key=config.seed))
    if config.integer_mode:
        junction_diag = rng.integers(4, 14, nj).astype(np.float64)
        factors = rng.integers(-2, 3, (m, 3, 3)).astype(np.float64)
        gram = factors @ factors.transpose(0, 2, 1)
        shift = np.maximum(1.0, np.ceil(0.5 * np.einsum("css->c", gram) / 3.0))
        interior = gram + shift[:, None, None] * np.eye(3)
        raw = rng.integers(-3, 4, (m, 3, 3)).astype(np.float64)
        coupling = np.round(config.coupling_scale * raw)
    else:
        junction_diag = 1.0 + 3.0 * rng.random(nj)
        factors = rng.standard_normal((m, 3, 3))
        gram = factors @ factors.transpose(0, 2, 1)
        shift = 0.5 * np.einsum("css->c", gram) / 3.0
        interior = gram + shift[:, None, None] * np.eye(3)
        raw = rng.standard_normal((m, 3, 3))
        corners = template.corners_array(level)
        amplitude = np.sqrt(
            junction_diag[corners][:, :, None]
            * np.einsum("css->cs", interior)[:, None, :]
        )
        coupling = config.coupling_scale * raw * amplitude
    if config.strict_mask:
        keep = np.zeros((3, 3))
        for slot, neighbors in enumerate(CORNER_SLOT_NEIGHBORS):
            for s in neighbors:
                keep[slot, s] = 1.0
        coupling = coupling * keep
    for _ in range(max_retries + 1):
        cov = BlockCovariance.from_blocks(
            template, level, junction_diag, interior, coupling
        )
        if is_positive_definite(cov):
            return cov
        coupling = coupling * 0.5
        if config.integer_mode:
            coupling = np.round(coupling)
    raise GenerationFailed(
        f"could not reach positive definiteness after {max_retries} halvings "
        f"(seed {config.seed}, coupling_scale {config.coupling_scale})"
    )


# the built-in 15-asset integer reference instance (level 2); exercised
# throughout the test suite, so its entries are pinned here verbatim
_REFERENCE_ROWS = (
    (7, 0, 0, 0, 0, 0, -3, 0, 0, 0, 0, 0, 0, 0, 0),
    (0, 13, 0, 0, 0, 0, 0, 0, 0, -3, 0, 3, 0, 0, 0),
    (0, 0, 8, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -5, 0),
    (0, 0, 0, 7, 0, 0, 4, 0, 0, -3, -2, 0, 0, 0, 0),
    (0, 0, 0, 0, 12, 0, 0, 0, 1, 0, 0, 0, -2, 0, 0),
    (0, 0, 0, 0, 0, 7, 0, 0, 0, 0, 0, -1, 0, 0, 1),
    (-3, 0, 0, 4, 0, 0, 9, -1, 4, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 0, -1, 11, -6, 0, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 1, 0, 4, -6, 12, 0, 0, 0, 0, 0, 0),
    (0, -3, 0, -3, 0, 0, 0, 0, 0, 13, -1, -3, 0, 0, 0),
    (0, 0, 0, -2, 0, 0, 0, 0, 0, -1, 8, -1, 0, 0, 0),
    (0, 3, 0, 0, 0, -1, 0, 0, 0, -3, -1, 9, 0, 0, 0),
    (0, 0, 0, 0, -2, 0, 0, 0, 0, 0, 0, 0, 9, 1, 3),
    (0, 0, -5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 12, -1),
    (0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 3, -1, 8),
)


def reference_matrix() -> np.ndarray:
    """The reference instance as a dense 15x15 float array."""
    return np.array(_REFERENCE_ROWS, dtype=np.float64)


def reference_instance() -> BlockCovariance:
    """The built-in level-2 integer instance, validated through from_dense.

    Its couplings do not fit any single strict edge convention, so it
    validates under the permissive mask (which is exactly why permissive is
    the default).
    """
    from .covariance import from_dense

    return from_dense(reference_matrix(), template_for(2), 2)
