import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from apps.core.services.atomic_io import write_csv_atomic
from apps.evaluation.services.dk import DkResult, compute_dk
from apps.evaluation.services.forecasting import ForecastTrace, detect_crossing, forecast
from apps.forenet.services.architectures import ModelSpec
from apps.forenet.services.model import Model, build, forward
from apps.preprocess.services.windowing import WindowedDataset
from apps.tensor_core.services.errors import NonFiniteActivation, NonFiniteGradient
from apps.tensor_core.services.ops import mse_loss, rmse
from apps.tensor_core.services.optim import AdamState, adam_step, clip_by_global_norm
from apps.training.services.config import TrainConfig
from apps.training.services.errors import (
    DivergedLoss,
    NoTrainingData,
    TargetNotFound,
    TrainingError,
)

logger = logging.getLogger(__name__)

TRAINING_LOG_COLUMNS = ["epoch", "train_rmse", "test_dk_logs", "qualified"]


@dataclass(frozen=True, slots=True)
class TrainingPairs:
    sources: tuple[WindowedDataset, ...]
    origin: np.ndarray
    position: np.ndarray

    @classmethod
    def from_datasets(cls, datasets: Sequence[WindowedDataset]) -> "TrainingPairs":
        sources = tuple(datasets)
        counts = [dataset.pair_count for dataset in sources]
        origin = np.repeat(np.arange(len(sources), dtype=np.int64), counts)
        position = np.concatenate(
            [np.arange(count, dtype=np.int64) for count in counts] or [np.zeros(0, dtype=np.int64)]
        )
        return cls(sources=sources, origin=origin, position=position)

    def __len__(self) -> int:
        return int(self.origin.shape[0])

    @property
    def origin_tags(self) -> frozenset[int]:
        return frozenset(dataset.failure_tag for dataset in self.sources)

    def window(self, index: int) -> np.ndarray:
        source = self.sources[self.origin[index]]
        return np.asarray(source.inputs[self.position[index]], dtype=np.float64)

    def target(self, index: int) -> float:
        source = self.sources[self.origin[index]]
        return float(source.targets[self.position[index]])

    def targets(self) -> np.ndarray:
        return np.concatenate(
            [np.asarray(dataset.targets, dtype=np.float64) for dataset in self.sources]
            or [np.zeros(0)]
        )


@dataclass(frozen=True, slots=True)
class EpochRecord:
    epoch: int
    train_rmse: float
    test_rmse: float | None
    test_dk_logs: int | None
    qualified: bool


@dataclass(slots=True)
class TrainOutcome:
    target_failure_tag: int
    qualification_tag: int
    initial_rmse: float
    records: list[EpochRecord] = field(default_factory=list)
    best_epoch: int | None = None
    best_model: Model | None = None
    final_model: Model | None = None
    target_dk: DkResult | None = None
    target_trace: ForecastTrace | None = None

    @property
    def qualified(self) -> bool:
        return self.best_model is not None

    @property
    def message(self) -> str:
        if self.best_epoch is None:
            return f"No epoch forecast failure {self.qualification_tag} preemptively; no checkpoint kept."
        return f"Kept epoch {self.best_epoch} for failure {self.target_failure_tag}."


def evaluate_rmse(model: Model, pairs: TrainingPairs) -> float:
    predictions = np.fromiter(
        (float(forward(model, pairs.window(index)).data[0]) for index in range(len(pairs))),
        dtype=np.float64,
        count=len(pairs),
    )
    return rmse(predictions, pairs.targets())


def train_epoch(
    model: Model,
    pairs: TrainingPairs,
    cfg: TrainConfig,
    *,
    state: AdamState,
    rng: np.random.Generator,
    epoch: int = 1,
) -> float:
    if len(pairs) == 0:
        raise NoTrainingData("Cannot train an epoch without pairs.")
    order = rng.permutation(len(pairs)) if cfg.shuffle else np.arange(len(pairs))
    squared_error = 0.0
    for batch_start in range(0, len(order), cfg.batch_size):
        batch = order[batch_start : batch_start + cfg.batch_size]
        model.params.zero_grad()
        try:
            for index in batch:
                loss = mse_loss(forward(model, pairs.window(index)), pairs.target(index))
                squared_error += float(loss.data)
                loss.backward()
            grads = {name: grad / len(batch) for name, grad in model.params.gradients().items()}
            grads, _ = clip_by_global_norm(grads, cfg.clip_norm)
        except (NonFiniteActivation, NonFiniteGradient) as exc:
            raise DivergedLoss(f"Training loss diverged in epoch {epoch}: {exc}", epoch=epoch) from exc
        adam_step(model.params, grads, state)
    epoch_rmse = math.sqrt(squared_error / len(pairs))
    if not math.isfinite(epoch_rmse):
        raise DivergedLoss(f"Training loss diverged in epoch {epoch}.", epoch=epoch)
    return epoch_rmse


def _split_datasets(
    datasets: Sequence[WindowedDataset],
    target_tag: int,
    holdout_policy: str,
) -> tuple[WindowedDataset, WindowedDataset, list[WindowedDataset]]:
    by_tag = {dataset.failure_tag: dataset for dataset in datasets}
    if target_tag not in by_tag:
        raise TargetNotFound(f"Failure {target_tag} is not among the training datasets.")
    if len(by_tag) < 2:
        raise NoTrainingData("Leave-one-out training needs at least two failure datasets.")
    target = by_tag[target_tag]
    rest = [by_tag[tag] for tag in sorted(by_tag) if tag != target_tag]
    qualification = target
    if holdout_policy == "inner":
        if len(rest) < 2:
            raise NoTrainingData("The inner holdout needs at least two non-target datasets.")
        qualification = rest.pop()

    shapes = {dataset.input_shape for dataset in datasets}
    windows = {(dataset.window_length, dataset.horizon) for dataset in datasets}
    if len(shapes) != 1 or len(windows) != 1:
        raise TrainingError("All datasets must share window length, horizon and parameter count.")
    return target, qualification, rest


def _score(record: EpochRecord, selection: str) -> tuple[float, int]:
    if selection == "rmse":
        return (record.test_rmse if record.test_rmse is not None else math.inf, record.epoch)
    return (abs(record.test_dk_logs or 0), record.epoch)


def _evaluate_dataset(
    model: Model, dataset: WindowedDataset, threshold: float
) -> tuple[ForecastTrace, DkResult | None]:
    trace = forecast(model, dataset)
    crossing = detect_crossing(trace, threshold)
    if isinstance(crossing, int):
        return trace, compute_dk(crossing, trace.actual_failure_index)
    return trace, None


def train_leave_one_out(
    datasets: Sequence[WindowedDataset],
    target_tag: int,
    spec: ModelSpec,
    cfg: TrainConfig,
    *,
    on_epoch: Callable[[EpochRecord], None] | None = None,
) -> TrainOutcome:
    target, qualification, training_sets = _split_datasets(datasets, target_tag, cfg.holdout_policy)
    if spec.is_three_d:
        target = target.with_depth()
        qualification = qualification.with_depth()
        training_sets = [dataset.with_depth() for dataset in training_sets]

    pairs = TrainingPairs.from_datasets(training_sets)
    if len(pairs) == 0:
        raise NoTrainingData(f"No training pairs remain once failure {target_tag} is held out.")
    if target_tag in pairs.origin_tags:
        raise TrainingError(f"Failure {target_tag} leaked into its own training pairs.")

    model = build(spec)
    state = AdamState.for_params(
        model.params,
        learning_rate=cfg.learning_rate,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        epsilon=cfg.epsilon,
    )
    rng = np.random.default_rng(cfg.seed)
    outcome = TrainOutcome(
        target_failure_tag=target_tag,
        qualification_tag=qualification.failure_tag,
        initial_rmse=evaluate_rmse(model, pairs),
    )
    logger.info(
        "Started leave-one-out training.",
        extra={
            "target": target_tag,
            "architecture": str(spec.architecture),
            "pairs": len(pairs),
            "training_tags": sorted(pairs.origin_tags),
        },
    )

    best: EpochRecord | None = None
    for epoch in range(1, cfg.epochs + 1):
        train_rmse = train_epoch(model, pairs, cfg, state=state, rng=rng, epoch=epoch)
        try:
            trace, dk = _evaluate_dataset(model, qualification, cfg.threshold)
        except NonFiniteActivation as exc:
            raise DivergedLoss(f"Forecast diverged after epoch {epoch}: {exc}", epoch=epoch) from exc
        record = EpochRecord(
            epoch=epoch,
            train_rmse=train_rmse,
            test_rmse=rmse(trace.predictions, trace.targets) if len(trace) else None,
            test_dk_logs=dk.dk_logs if dk else None,
            qualified=dk is not None and dk.dk_logs <= 0,
        )
        outcome.records.append(record)
        if on_epoch is not None:
            on_epoch(record)
        logger.info(
            "Finished training epoch.",
            extra={
                "target": target_tag,
                "epoch": epoch,
                "train_rmse": train_rmse,
                "dk_logs": record.test_dk_logs,
                "qualified": record.qualified,
            },
        )
        if record.qualified and (best is None or _score(record, cfg.selection) < _score(best, cfg.selection)):
            best = record
            outcome.best_model = model.clone()

    outcome.final_model = model
    if best is not None and outcome.best_model is not None:
        outcome.best_epoch = best.epoch
        outcome.target_trace, outcome.target_dk = _evaluate_dataset(
            outcome.best_model, target, cfg.threshold
        )
    logger.info(
        "Completed leave-one-out training.",
        extra={"target": target_tag, "best_epoch": outcome.best_epoch},
    )
    return outcome


def training_log_frame(records: Sequence[EpochRecord]) -> pd.DataFrame:
    frame = pd.DataFrame(
        [
            {
                "epoch": record.epoch,
                "train_rmse": record.train_rmse,
                "test_dk_logs": record.test_dk_logs,
                "qualified": record.qualified,
            }
            for record in records
        ],
        columns=TRAINING_LOG_COLUMNS,
    )
    return frame.astype({"test_dk_logs": "Int64"})


def write_training_log(records: Sequence[EpochRecord], path: Path) -> Path:
    return write_csv_atomic(Path(path), training_log_frame(records))

