"""Exception hierarchy shared across the package."""


class EvGraphError(Exception):
    """Base class for all package errors."""


class InvalidArgument(EvGraphError, ValueError):
    pass


class UnsupportedGraph(EvGraphError, ValueError):
    """Raised when an operation needs a property the graph lacks (e.g. symmetry)."""


class NumericFailure(EvGraphError, ArithmeticError):
    """A numerical routine failed to converge or produced non-finite values.

    Attributes
    ----------
    residual : float or None
        Residual norm at the point of failure, when meaningful.
    block : str or None
        Name of the parameter block that triggered the failure, when meaningful.
    """

    def __init__(self, message, residual=None, block=None):
        super().__init__(message)
        self.residual = residual
        self.block = block


class ExperimentFailure(EvGraphError, RuntimeError):
    pass
