import logging
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from apps.preprocess.services.errors import (
    EmptyDataset,
    HorizonTooLong,
    NotEnoughLogs,
    PreprocessError,
    ShapeMismatch,
)
from apps.preprocess.services.scaling import (
    ScalingParams,
    minmax_apply,
    minmax_fit_transform,
)
from apps.scada_ingest.services.records import FailureDataset

logger = logging.getLogger(__name__)


def linear_degradation(n_logs: int) -> np.ndarray:
    if n_logs <= 0:
        raise EmptyDataset("A failure dataset needs at least one log to be labelled.")
    return np.arange(n_logs - 1, -1, -1, dtype=np.float64)


def label_scale_for(n_logs: int) -> float:
    return float(max(n_logs - 1, 1))


@dataclass(frozen=True, slots=True)
class LabeledDataset:
    scaled: np.ndarray
    labels: np.ndarray
    scaling: ScalingParams
    label_scale: float

    @property
    def n_logs(self) -> int:
        return int(self.scaled.shape[0])

    @property
    def parameter_count(self) -> int:
        return int(self.scaled.shape[1])


def label_dataset(matrix: np.ndarray, *, scaling: ScalingParams | None = None) -> LabeledDataset:
    if scaling is None:
        scaled, scaling = minmax_fit_transform(matrix)
    else:
        scaled = minmax_apply(matrix, scaling)
    scale = label_scale_for(scaled.shape[0])
    labels = linear_degradation(scaled.shape[0]) / scale
    return LabeledDataset(scaled=scaled, labels=labels, scaling=scaling, label_scale=scale)


@dataclass(frozen=True, slots=True)
class SlidingPairs:
    windows: np.ndarray
    labels: np.ndarray
    window_length: int
    stride: int
    starts: np.ndarray

    @property
    def count(self) -> int:
        return int(self.starts.shape[0])

    @property
    def outputs(self) -> np.ndarray:
        return self.labels[self.starts + self.window_length]


def _window_view(scaled: np.ndarray, window_length: int) -> np.ndarray:
    # (N-l+1, M, l) -> (N-l+1, l, M), still a view over ``scaled``
    return sliding_window_view(scaled, window_length, axis=0).transpose(0, 2, 1)


def slide_window(
    scaled: np.ndarray,
    labels: np.ndarray,
    window_length: int,
    stride: int = 1,
) -> SlidingPairs:
    if window_length < 1 or stride < 1:
        raise PreprocessError("Window length and stride must be positive.")
    if scaled.ndim != 2 or labels.shape != (scaled.shape[0],):
        raise ShapeMismatch("Labels must hold one value per log of the scaled matrix.")
    n_logs = scaled.shape[0]
    if n_logs < window_length:
        raise NotEnoughLogs(f"{n_logs} logs cannot fill a window of {window_length}.")

    pair_limit = n_logs - window_length
    starts = np.arange(0, pair_limit, stride, dtype=np.int64)
    windows = _window_view(scaled, window_length)[:pair_limit:stride]
    return SlidingPairs(
        windows=windows,
        labels=labels,
        window_length=window_length,
        stride=stride,
        starts=starts,
    )


@dataclass(frozen=True, slots=True)
class WindowedDataset:
    failure_tag: int
    inputs: np.ndarray
    targets: np.ndarray
    starts: np.ndarray
    window_length: int
    horizon: int
    stride: int
    n_logs: int
    label_scale: float
    scaling: ScalingParams | None = None
    depth_expanded: bool = False
    meta: dict[str, object] = field(default_factory=dict)

    @property
    def pair_count(self) -> int:
        return int(self.targets.shape[0])

    @property
    def parameter_count(self) -> int:
        return int(self.inputs.shape[2])

    @property
    def input_shape(self) -> tuple[int, ...]:
        return tuple(int(item) for item in self.inputs.shape[1:])

    @property
    def log_indices(self) -> np.ndarray:
        return self.starts + self.window_length + self.horizon

    @property
    def failure_index(self) -> int:
        return self.n_logs - 1

    def with_depth(self) -> "WindowedDataset":
        if self.depth_expanded:
            return self
        return replace(self, inputs=self.inputs[..., np.newaxis], depth_expanded=True)


def apply_forecast_window(
    pairs: SlidingPairs,
    horizon: int,
    *,
    failure_tag: int = 0,
    label_scale: float = 1.0,
    scaling: ScalingParams | None = None,
) -> WindowedDataset:
    if horizon < 0:
        raise PreprocessError("Forecast horizon must be non-negative.")
    n_logs = pairs.labels.shape[0]
    limit = n_logs - pairs.window_length - horizon
    keep = pairs.starts < limit
    starts = pairs.starts[keep]
    if starts.size == 0:
        raise HorizonTooLong(f"Horizon {horizon} leaves no pairs for {n_logs} logs.")
    return WindowedDataset(
        failure_tag=failure_tag,
        inputs=pairs.windows[: starts.size],
        targets=pairs.labels[starts + pairs.window_length + horizon],
        starts=starts,
        window_length=pairs.window_length,
        horizon=horizon,
        stride=pairs.stride,
        n_logs=n_logs,
        label_scale=label_scale,
        scaling=scaling,
    )


def expand_depth(window: np.ndarray) -> np.ndarray:
    if window.ndim < 2:
        raise ShapeMismatch("Depth expansion needs at least a 2-D window.")
    return window[..., np.newaxis]


def window_failure_dataset(
    dataset: FailureDataset,
    *,
    window_length: int,
    horizon: int,
    stride: int = 1,
    scaling: ScalingParams | None = None,
) -> WindowedDataset:
    labeled = label_dataset(dataset.matrix, scaling=scaling)
    pairs = slide_window(labeled.scaled, labeled.labels, window_length, stride)
    windowed = replace(
        apply_forecast_window(
            pairs,
            horizon,
            failure_tag=dataset.failure_tag,
            label_scale=labeled.label_scale,
            scaling=labeled.scaling,
        ),
        meta={"turbine_tag": dataset.turbine_tag, "component": str(dataset.component)},
    )
    logger.info(
        "Windowed failure dataset.",
        extra={
            "failure_tag": dataset.failure_tag,
            "n_logs": labeled.n_logs,
            "pairs": windowed.pair_count,
            "window_length": window_length,
            "horizon": horizon,
        },
    )
    return windowed
