from dataclasses import dataclass

import numpy as np

from apps.preprocess.services.errors import EmptyDataset, NonFiniteInput, ShapeMismatch

# frozen-parameter scaling may extrapolate; keep it within this band
APPLY_CLAMP = (-1.0, 2.0)


@dataclass(frozen=True, slots=True)
class ScalingParams:
    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self) -> None:
        if self.minimum.shape != self.maximum.shape or self.minimum.ndim != 1:
            raise ShapeMismatch("Scaling minimum and maximum must be equal-length vectors.")
        if np.any(self.minimum > self.maximum):
            raise ShapeMismatch("Scaling minimum exceeds maximum for some column.")

    @property
    def column_count(self) -> int:
        return int(self.minimum.shape[0])

    def to_payload(self) -> dict[str, list[float]]:
        return {
            "min": [float(item) for item in self.minimum],
            "max": [float(item) for item in self.maximum],
        }

    @classmethod
    def from_payload(cls, payload: dict[str, list[float]]) -> "ScalingParams":
        return cls(
            minimum=np.asarray(payload["min"], dtype=np.float64),
            maximum=np.asarray(payload["max"], dtype=np.float64),
        )


def minmax_fit_transform(matrix: np.ndarray) -> tuple[np.ndarray, ScalingParams]:
    values = np.asarray(matrix, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] == 0:
        raise EmptyDataset("Min-max scaling needs a non-empty N x M matrix.")
    _require_finite(values)

    params = ScalingParams(minimum=values.min(axis=0), maximum=values.max(axis=0))
    return _scale(values, params), params


def minmax_apply(matrix: np.ndarray, params: ScalingParams) -> np.ndarray:
    values = np.asarray(matrix, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != params.column_count:
        raise ShapeMismatch(
            f"Matrix has shape {values.shape}; scaling expects {params.column_count} columns."
        )
    _require_finite(values)
    return np.clip(_scale(values, params, clip=False), *APPLY_CLAMP)


def _scale(values: np.ndarray, params: ScalingParams, *, clip: bool = True) -> np.ndarray:
    span = params.maximum - params.minimum
    constant = span == 0.0
    safe_span = np.where(constant, 1.0, span)
    scaled = (values - params.minimum) / safe_span
    # constant sensors carry no signal
    scaled[:, constant] = 0.0
    if clip:
        np.clip(scaled, 0.0, 1.0, out=scaled)
    return scaled


def _require_finite(values: np.ndarray) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        row, column = (int(item) for item in np.argwhere(bad)[0])
        raise NonFiniteInput(f"Non-finite value at row {row}, column {column}.")
