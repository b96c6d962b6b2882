"""Exception hierarchy shared by the library and the command line."""


class IBAPError(Exception):
    """Base class for every error raised by :mod:`ibap`."""


class InputError(IBAPError, ValueError):
    """Malformed or inconsistent input (shapes, metrics, probabilities)."""


class RefusalError(IBAPError):
    """A construction was requested on a system for which it does not exist.

    ``details`` carries the numerical evidence (IBAP constant, dimension gap,
    ...) so callers can report why the request was refused.
    """

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class IllConditionedError(RefusalError):
    """The system is formally admissible but too close to degenerate to solve."""
