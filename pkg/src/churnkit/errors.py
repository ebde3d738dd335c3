"""Exception hierarchy shared by every churnkit module."""


class ChurnkitError(Exception):
    """Base class for user-facing data and numerical errors."""


class InvalidInputError(ChurnkitError, ValueError):
    """Input violates a documented precondition."""


class DegenerateDataError(ChurnkitError):
    """Data is valid but carries too little information for the estimate."""


class NumericalError(ChurnkitError, ArithmeticError):
    """A computation hit a singular or non-finite intermediate."""


class ConvergenceError(ChurnkitError):
    """An iterative solver stopped before meeting its tolerance.

    Attributes
    ----------
    last_iterate : numpy.ndarray
        Parameter vector at the final iteration.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate
