"""Exception types raised across the package."""


class KgcrfError(Exception):
    """Base class for all package errors."""


class InvalidSimilarityError(KgcrfError, ValueError):
    """Matrix is not symmetric, nonnegative, or has a nonzero diagonal."""


class IsolatedVertexError(KgcrfError, ValueError):
    """A vertex has zero degree, so the graph cannot be normalized."""


class SizeOverflowError(KgcrfError, MemoryError):
    """Dense product would exceed the configured size cap."""


class DimensionMismatchError(KgcrfError, ValueError):
    pass


class NoConvergenceError(KgcrfError, RuntimeError):
    pass


class DegreeOutOfRangeError(KgcrfError, ValueError):
    pass


class BadFactorizationError(KgcrfError, ValueError):
    pass


class AsymmetricFactorError(KgcrfError, ValueError):
    pass


class InsufficientZerosError(KgcrfError, ValueError):
    pass


class NonPositiveParamError(KgcrfError, ValueError):
    pass


class TooFewRecordsError(KgcrfError, ValueError):
    pass
