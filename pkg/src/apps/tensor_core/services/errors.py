class TensorError(RuntimeError):
    """Raised for tensor arithmetic failures."""


class ShapeMismatch(TensorError):
    """Raised when operand shapes do not fit an operation."""


class NonFiniteActivation(TensorError):
    """Raised when a forward operation produces NaN or infinity."""


class NonFiniteGradient(TensorError):
    """Raised when back-propagation produces NaN or infinity."""


class GraphCycle(TensorError):
    """Raised when a recorded computation refers back to itself."""


class EmptyBatch(TensorError):
    """Raised when a loss is requested over zero samples."""
