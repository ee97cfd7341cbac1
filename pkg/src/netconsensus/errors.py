"""Exception types shared across the package."""


class DimensionError(ValueError):
    """A matrix or vector has an incompatible or non-square shape."""


class AmbiguityError(ValueError):
    """Zero is not a simple eigenvalue, so the requested object is not unique.

    Raised when an operation needs a one-dimensional null space (a unique
    stationary distribution / consensus direction) and the input does not
    provide one.
    """


class NumericalError(RuntimeError):
    """An iterative method failed to converge or a computation blew up."""
