"""Exception hierarchy.

Every error raised by the package derives from :class:`FofPolyError`; the
argument-style errors also derive from :class:`ValueError` so that generic
callers (and scikit-learn's estimator checks) can catch them as usual.
"""


class FofPolyError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(FofPolyError, ValueError):
    pass


class GridMismatchError(FofPolyError, ValueError):
    pass


class DomainError(FofPolyError, ValueError):
    pass


class NumericError(FofPolyError, ArithmeticError):
    pass


class ResourceLimitError(FofPolyError, MemoryError):
    pass


class DegenerateOracleError(FofPolyError):
    """The oracle spectrum has too few reliable modes."""

    def __init__(self, message, rank=None):
        super().__init__(message)
        self.rank = rank


class OutOfRangeError(FofPolyError, ValueError):
    pass


class SearchFailureError(FofPolyError):
    """Codebook search stopped before reaching the target size."""

    def __init__(self, message, achieved=None, target=None):
        super().__init__(message)
        self.achieved = achieved
        self.target = target


class EpsilonTooLargeError(FofPolyError, ValueError):
    def __init__(self, message, max_epsilon=None):
        super().__init__(message)
        self.max_epsilon = max_epsilon


class ConstructionBugError(FofPolyError, AssertionError):
    pass


class ConfigError(FofPolyError, ValueError):
    pass
