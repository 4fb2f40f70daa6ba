"""Exception and warning types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ToolkitError, ValueError):
    """A numeric argument lies outside the mathematical domain of an operation."""


class DataError(ToolkitError, ValueError):
    """Input data violate a structural precondition (shape, labels, file format)."""


class ConvergenceError(ToolkitError, RuntimeError):
    """An iterative fit failed to converge; carries the iterate trace."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class ToolkitWarning(UserWarning):
    """Base class for toolkit warnings; the CLI collects these into run summaries."""


class SaturationWarning(ToolkitWarning):
    """A tail statistic saturated double precision and was clamped."""


class ClipWarning(ToolkitWarning):
    """A probability estimate fell outside its range and was clipped."""


class DegeneracyWarning(ToolkitWarning):
    """Degenerate input produced a boundary-case result."""


class ExtrapolationWarning(ToolkitWarning):
    """A fitted curve was evaluated outside the range it was fitted on."""


class EmptyTailWarning(ToolkitWarning):
    """No observations lie beyond the requested cutoff."""
