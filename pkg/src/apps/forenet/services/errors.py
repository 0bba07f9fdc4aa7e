class ForeNetError(RuntimeError):
    """Raised when a forecasting model cannot be built or run."""


class UnsupportedShape(ForeNetError):
    """Raised when an input shape is too small or has the wrong rank for an architecture."""


class CheckpointError(ForeNetError):
    """Raised when a checkpoint file cannot be read or written."""


class BadMagic(CheckpointError):
    """Raised when a file does not start with the checkpoint marker."""


class VersionMismatch(CheckpointError):
    """Raised when a checkpoint uses an unsupported format version."""


class ChecksumMismatch(CheckpointError):
    """Raised when a checkpoint is truncated or its checksum disagrees."""
