"""Exception taxonomy.

Validation problems (bad input shape, symmetry, sparsity pattern) and
numerical problems (singular blocks, loss of positive definiteness) are kept
on separate branches so callers, and the command line front end, can map them
to distinct exit codes.
"""


class HmvpError(Exception):
    """Base class for all package errors."""


class ValidationError(HmvpError):
    """Input fails a structural precondition (shape, symmetry, pattern)."""


class DimensionMismatch(ValidationError):
    pass


class NotSymmetric(ValidationError):
    pass


class NonPositiveDiagonal(ValidationError):
    pass


class LevelOutOfRange(ValidationError):
    pass


class SparsityViolation(ValidationError):
    """A matrix entry lies outside the adjacency pattern for its level.

    Carries the first offending index pair (row-major order).
    """

    def __init__(self, i: int, j: int, value: float, level: int):
        self.i = int(i)
        self.j = int(j)
        self.value = float(value)
        self.level = int(level)
        super().__init__(
            f"entry ({self.i}, {self.j}) = {self.value:g} lies outside the "
            f"level-{self.level} adjacency pattern"
        )


class SingularityError(HmvpError):
    """A matrix or block that must be inverted is numerically singular."""


class SingularInteriorBlock(SingularityError):
    def __init__(self, level: int, cluster: int):
        self.level = int(level)
        self.cluster = int(cluster)
        super().__init__(
            f"interior 3x3 block of cluster {self.cluster} at level "
            f"{self.level} is numerically singular"
        )


class SingularBaseMatrix(SingularityError):
    pass


class SingularTrailingBlock(SingularityError):
    pass


class NotPositiveDefinite(SingularityError):
    pass


class ZeroSum(HmvpError):
    """Weights sum to (numerically) zero; normalization is undefined."""


class FillOutsideMask(HmvpError):
    """Internal consistency failure: a reduction step produced a nonzero

    entry outside the adjacency pattern of the coarser level. This cannot
    happen for inputs that conform to the hierarchy; it indicates corrupted
    block data rather than bad user input.
    """

    def __init__(self, i: int, j: int, level: int):
        self.i = int(i)
        self.j = int(j)
        self.level = int(level)
        super().__init__(
            f"reduction produced fill at ({self.i}, {self.j}) outside the "
            f"level-{self.level} pattern"
        )


class GenerationFailed(HmvpError):
    """Random instance generation could not reach positive definiteness."""
