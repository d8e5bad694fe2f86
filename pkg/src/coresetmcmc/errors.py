"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A quantity that must be finite came out NaN or infinite."""


class UnsupportedModelError(ValueError):
    """Operation requires a model capability the given model lacks."""


class NotReadyError(RuntimeError):
    """Not enough data has accumulated to evaluate the quantity."""


class ReferenceFailure(RuntimeError):
    """The reference posterior sampler diverged or produced non-finite state."""
