"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition."""


class BracketError(RuntimeError):
    """A bisection bracket could not be established; enlarge the bracket."""


class InvalidProfileError(ValueError):
    """A complexity profile does not grow enough for the requested inversion."""


class IterationLimitError(RuntimeError):
    """A solver hit its iteration budget. Carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
