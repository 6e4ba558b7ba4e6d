"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ComputationError(RuntimeError):
    """A numerical procedure could not produce a usable result."""


class IterationError(ComputationError):
    """An iterative solver ran out of iterations.

    Carries the last residual so callers can decide whether the partial
    result is still useful.
    """

    def __init__(self, message, last_residual=None):
        super().__init__(message)
        self.last_residual = last_residual


class DegeneracyError(ComputationError):
    """An iteration collapsed onto a trivial/degenerate state."""


class GridFormatError(ValueError):
    """A grid-function file could not be parsed.

    ``line`` is the 1-based line number where parsing failed.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
