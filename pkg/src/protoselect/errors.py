"""Exception types shared across the package."""


class InputError(ValueError):
    """Bad input: malformed files, dimension mismatches, budget violations."""


class NumericalError(ArithmeticError):
    """Numerical validity failure, e.g. a kernel matrix that is not PSD."""


class ConvergenceError(NumericalError):
    """Solver failed to reach its tolerance; carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
