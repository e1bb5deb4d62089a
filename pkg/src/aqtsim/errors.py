"""Exception types raised by the simulator."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class UnconvergedError(ArithmeticError):
    """Step-halving check of the RK4 integrator disagreed beyond tolerance.

    Both estimates are kept so callers can inspect or report them.
    """

    def __init__(self, message, coarse, fine, difference, tolerance):
        super().__init__(message)
        self.coarse = coarse
        self.fine = fine
        self.difference = difference
        self.tolerance = tolerance


class ConsistencyError(ArithmeticError):
    """A closed-form result disagreed with its numerical cross-check."""
