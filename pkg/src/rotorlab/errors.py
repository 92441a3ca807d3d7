"""Exception hierarchy shared by all rotorlab modules."""


class RotorError(Exception):
    """Base class for rotorlab failures."""


class DomainError(RotorError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(RotorError, ValueError):
    """Inputs are well-typed but violate a stated precondition."""


class TruncationError(RotorError):
    """A truncated angular-momentum window cannot hold the requested state.

    ``tail_mass`` is the probability weight that would fall outside the window.
    """

    def __init__(self, message, tail_mass):
        super().__init__(f"{message} (tail mass {tail_mass:.3e})")
        self.tail_mass = tail_mass


class ConvergenceError(RotorError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


class BracketError(RotorError):
    """A root or critical point could not be bracketed.

    ``scan`` holds the ``(abscissa, value)`` pairs that were inspected.
    """

    def __init__(self, message, scan=()):
        super().__init__(message)
        self.scan = list(scan)


class NonFiniteError(RotorError, ArithmeticError):
    """An objective returned NaN or infinity."""

    def __init__(self, message, abscissa):
        super().__init__(f"{message} at x = {abscissa!r}")
        self.abscissa = abscissa


class InconsistentMomentsError(RotorError, ValueError):
    """Moments that no quantum state can produce."""
