class TrainingError(RuntimeError):
    """Raised when a leave-one-out training run cannot proceed."""


class NoTrainingData(TrainingError):
    """Raised when too few failure datasets remain once the target is held out."""


class TargetNotFound(TrainingError):
    """Raised when the requested target failure tag is not among the datasets."""


class DivergedLoss(TrainingError):
    """Raised when the training loss becomes non-finite."""

    def __init__(self, message: str, *, epoch: int) -> None:
        super().__init__(message)
        self.epoch = epoch
