from dataclasses import dataclass

from apps.core.services.run_config import RunConfig
from apps.training.services.errors import TrainingError

SELECTION_METRICS = ("dk", "rmse")
HOLDOUT_POLICIES = ("target", "inner")


@dataclass(frozen=True, slots=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    clip_norm: float = 5.0
    seed: int = 0
    window_length: int = 24
    horizon: int = 50
    stride: int = 1
    shuffle: bool = True
    selection: str = "dk"
    holdout_policy: str = "target"
    threshold: float = 0.0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise TrainingError("epochs must be at least 1.")
        if self.batch_size < 1:
            raise TrainingError("batch_size must be at least 1.")
        if self.selection not in SELECTION_METRICS:
            raise TrainingError(f"selection must be one of: {', '.join(SELECTION_METRICS)}.")
        if self.holdout_policy not in HOLDOUT_POLICIES:
            raise TrainingError(f"holdout_policy must be one of: {', '.join(HOLDOUT_POLICIES)}.")

    @classmethod
    def from_run_config(cls, config: RunConfig) -> "TrainConfig":
        return cls(
            epochs=config.epochs,
            batch_size=config.batch_size,
            learning_rate=config.learning_rate,
            beta1=config.beta1,
            beta2=config.beta2,
            epsilon=config.epsilon,
            clip_norm=config.clip_norm,
            seed=config.seed,
            window_length=config.window_length,
            horizon=config.horizon,
            stride=config.stride,
            shuffle=config.shuffle,
            selection=config.selection,
            holdout_policy=config.holdout_policy,
            threshold=config.threshold,
        )
