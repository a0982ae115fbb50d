"""Exception types shared across the package."""


class NearoptError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(NearoptError, ValueError):
    """An argument value is outside its documented domain."""


class ConfigurationError(NearoptError):
    """A config file, catalog, or pathway definition is missing or malformed."""


class StateError(NearoptError, RuntimeError):
    """An operation was called on an object in the wrong state,
    e.g. reading metrics off a non-optimal solution."""


class SolverFailure(NearoptError, RuntimeError):
    """The LP solver stalled or failed numerically.

    Carries the iteration count at failure when the backend reports one.
    """

    def __init__(self, message: str, iterations: int | None = None):
        super().__init__(message)
        self.iterations = iterations


class DegenerateHullError(NearoptError):
    """A point cloud has lower affine rank than the requested hull dimension.

    ``rank`` is the detected affine rank, so callers can retry in the
    affine subspace.
    """

    def __init__(self, message: str, rank: int):
        super().__init__(message)
        self.rank = rank


class StaleArtifactError(NearoptError):
    """A pipeline stage input no longer matches the hash recorded in the
    run manifest."""
