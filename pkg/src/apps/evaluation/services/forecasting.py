import logging
from dataclasses import dataclass

import numpy as np

from apps.forenet.services.model import Model, predict_many
from apps.preprocess.services.windowing import WindowedDataset
from apps.tensor_core.services.errors import ShapeMismatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class ForecastTrace:
    failure_tag: int
    predictions: np.ndarray
    targets: np.ndarray
    log_indices: np.ndarray
    window_length: int
    horizon: int
    actual_failure_index: int

    def __post_init__(self) -> None:
        if not (self.predictions.shape == self.targets.shape == self.log_indices.shape):
            raise ShapeMismatch("Trace predictions, targets and log indices must align.")

    def __len__(self) -> int:
        return int(self.predictions.shape[0])


@dataclass(frozen=True, slots=True)
class NoForecastedFailure:
    threshold: float
    lowest_prediction: float


def forecast(model: Model, windowed: WindowedDataset) -> ForecastTrace:
    if model.spec.is_three_d:
        windowed = windowed.with_depth()
    if windowed.input_shape != model.spec.input_shape:
        raise ShapeMismatch(
            f"Failure {windowed.failure_tag} windows are {windowed.input_shape}; "
            f"model expects {model.spec.input_shape}."
        )
    predictions = predict_many(model, windowed.inputs)
    logger.info(
        "Forecast failure dataset.",
        extra={"failure_tag": windowed.failure_tag, "pairs": windowed.pair_count},
    )
    return ForecastTrace(
        failure_tag=windowed.failure_tag,
        predictions=predictions,
        targets=np.asarray(windowed.targets, dtype=np.float64),
        log_indices=windowed.log_indices,
        window_length=windowed.window_length,
        horizon=windowed.horizon,
        actual_failure_index=windowed.failure_index,
    )


def detect_crossing(trace: ForecastTrace, threshold: float = 0.0) -> int | NoForecastedFailure:
    """Log coordinate of the first prediction at or below ``threshold``; never interpolated."""
    if len(trace) == 0:
        return NoForecastedFailure(threshold=threshold, lowest_prediction=float("nan"))
    hits = np.flatnonzero(trace.predictions <= threshold)
    if hits.size == 0:
        return NoForecastedFailure(
            threshold=threshold,
            lowest_prediction=float(trace.predictions.min()),
        )
    return int(trace.log_indices[hits[0]])
