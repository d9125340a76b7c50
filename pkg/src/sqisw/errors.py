"""Exception types shared across the package."""


class NonUnitaryError(ValueError):
    """Raised when a matrix fails the unitarity check."""


class DimensionError(ValueError):
    """Raised on mismatched or unsupported matrix dimensions."""


class ConvergenceFailure(RuntimeError):
    """A solver could not reach its tolerance within the restart budget."""


class NotFound(LookupError):
    """A structure search exhausted its gate budget without success."""
