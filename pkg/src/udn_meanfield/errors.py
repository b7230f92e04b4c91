"""Exception types raised across the package."""


class ParameterError(ValueError):
    """A model or solver parameter violates its admissible range."""


class DomainError(ValueError):
    """A function was evaluated outside its mathematical domain."""


class NoBaseStationError(LookupError):
    """No base station lies in the observation window (an outage event)."""


class InsufficientDataError(RuntimeError):
    """Too few usable samples to form an estimate."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before meeting its tolerance.

    The per-iteration residuals are kept on ``trace`` and, for solvers run
    along a trajectory, the offending time on ``time``.
    """

    def __init__(self, message, trace=(), time=None):
        super().__init__(message)
        self.trace = list(trace)
        self.time = time
