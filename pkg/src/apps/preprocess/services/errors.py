class PreprocessError(RuntimeError):
    """Raised when a failure dataset cannot be turned into supervised pairs."""


class EmptyDataset(PreprocessError):
    """Raised when a dataset holds no logs."""


class NonFiniteInput(PreprocessError):
    """Raised when a matrix cell is NaN or infinite."""


class ShapeMismatch(PreprocessError):
    """Raised when frozen scaling parameters do not fit a matrix."""


class NotEnoughLogs(PreprocessError):
    """Raised when a dataset is shorter than the window length."""


class HorizonTooLong(PreprocessError):
    """Raised when the forecast horizon leaves no supervised pairs."""
