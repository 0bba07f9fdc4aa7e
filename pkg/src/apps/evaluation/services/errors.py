class EvaluationError(RuntimeError):
    """Raised when a forecast cannot be evaluated or reported."""


class TraceFormatError(EvaluationError):
    """Raised when a stored forecast trace is missing columns or metadata."""
