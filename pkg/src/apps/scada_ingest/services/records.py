from collections.abc import Iterator
from dataclasses import dataclass, field
from datetime import UTC, datetime, timedelta

import numpy as np
import pandas as pd

from apps.scada_ingest.models import FailureComponent

LOG_INTERVAL = timedelta(minutes=10)


class ScadaIngestError(RuntimeError):
    """Raised for SCADA or failure-log ingestion failures."""


class MalformedHeader(ScadaIngestError):
    """Raised when a CSV header does not match the expected schema."""


class EmptyFile(ScadaIngestError):
    """Raised when a SCADA export holds no data rows."""


class NonMonotonicTimestamps(ScadaIngestError):
    """Raised when a turbine repeats a timestamp."""


class MalformedTimestamp(ScadaIngestError):
    """Raised when a failure-log row carries an unparseable timestamp."""


@dataclass(frozen=True, slots=True)
class ScadaRecord:
    timestamp: datetime
    turbine_tag: str
    values: tuple[float, ...]


@dataclass(frozen=True, slots=True)
class ScadaTable:
    columns: tuple[str, ...]
    timestamps: np.ndarray
    turbine_tags: np.ndarray
    values: np.ndarray
    dropped_count: int = 0

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __getitem__(self, index: int) -> ScadaRecord:
        return ScadaRecord(
            timestamp=to_utc_datetime(self.timestamps[index]),
            turbine_tag=str(self.turbine_tags[index]),
            values=tuple(float(item) for item in self.values[index]),
        )

    def __iter__(self) -> Iterator[ScadaRecord]:
        for index in range(len(self)):
            yield self[index]

    @property
    def parameter_count(self) -> int:
        return int(self.values.shape[1])

    def turbine_slices(self) -> dict[str, slice]:
        slices: dict[str, slice] = {}
        if len(self) == 0:
            return slices
        tags = self.turbine_tags
        boundaries = np.flatnonzero(tags[1:] != tags[:-1]) + 1
        starts = np.concatenate(([0], boundaries))
        stops = np.concatenate((boundaries, [len(self)]))
        for start, stop in zip(starts, stops, strict=True):
            slices[str(tags[start])] = slice(int(start), int(stop))
        return slices


@dataclass(frozen=True, slots=True)
class FailureEvent:
    turbine_tag: str
    timestamp: datetime
    component: FailureComponent
    remarks: str
    failure_tag: int
    component_detail: str = ""

    @property
    def component_label(self) -> str:
        if self.component == FailureComponent.OTHER and self.component_detail:
            return self.component_detail
        return str(self.component.label)


@dataclass(frozen=True, slots=True)
class FailureDataset:
    failure_tag: int
    turbine_tag: str
    component: FailureComponent
    matrix: np.ndarray
    timestamps: np.ndarray
    valid: bool
    columns: tuple[str, ...] = ()
    remarks: str = ""
    component_detail: str = ""
    gap_count: int = 0

    def __post_init__(self) -> None:
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.timestamps.shape[0]:
            raise ScadaIngestError(
                f"Failure {self.failure_tag}: matrix rows and timestamps disagree."
            )

    @property
    def n_logs(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def parameter_count(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def failed_at(self) -> datetime:
        return to_utc_datetime(self.timestamps[-1])

    @property
    def component_label(self) -> str:
        if self.component == FailureComponent.OTHER and self.component_detail:
            return self.component_detail
        return str(self.component.label)


@dataclass(frozen=True, slots=True)
class IngestIssue:
    failure_tag: int
    turbine_tag: str
    reason: str
    message: str


@dataclass(slots=True)
class FailureSplit:
    datasets: list[FailureDataset] = field(default_factory=list)
    issues: list[IngestIssue] = field(default_factory=list)

    @property
    def valid_datasets(self) -> list[FailureDataset]:
        return [dataset for dataset in self.datasets if dataset.valid]


def to_utc_datetime(value: np.datetime64) -> datetime:
    return pd.Timestamp(value).tz_localize(UTC).to_pydatetime()


def to_datetime64(value: datetime) -> np.datetime64:
    stamp = pd.Timestamp(value)
    if stamp.tzinfo is not None:
        stamp = stamp.tz_convert(UTC).tz_localize(None)
    return stamp.to_datetime64().astype("datetime64[ns]")
