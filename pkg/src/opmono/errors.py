import numpy as np


class DimensionMismatchError(ValueError):
    pass


class NotPositiveDefiniteError(ValueError):
    pass


class DomainError(ValueError):
    """An eigenvalue (or scalar argument) lies outside a function's domain."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class SpecParseError(ValueError):
    pass


class EigenConvergenceError(np.linalg.LinAlgError):
    def __init__(self, residual):
        super().__init__(f"Jacobi eigensolver did not converge (off-diagonal norm {residual:.3g})")
        self.residual = residual


class LadderExhaustedError(RuntimeError):
    """The regularization ladder ended before two iterates agreed.

    ``iterates`` holds the last two computed values (fewer if the ladder broke
    down early) and ``eps`` the corresponding regularization levels.
    """

    def __init__(self, message, iterates, eps):
        super().__init__(message)
        self.iterates = iterates
        self.eps = eps
