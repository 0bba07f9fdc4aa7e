import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field, fields
from datetime import datetime
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from apps.core.services.atomic_io import write_csv_atomic
from apps.scada_ingest.models import FailureComponent
from apps.scada_ingest.services.records import (
    LOG_INTERVAL,
    FailureDataset,
    FailureEvent,
    to_utc_datetime,
)

logger = logging.getLogger(__name__)

COMPONENT_CYCLE = (
    FailureComponent.TRANSFORMER,
    FailureComponent.HYDRAULIC_GROUP,
    FailureComponent.GEARBOX,
    FailureComponent.GENERATOR_BEARING,
    FailureComponent.GENERATOR,
)
HEALTHY_FRACTION = 0.7
RAMP_AMPLITUDE = 3.0
LOGS_PER_DAY = 24 * 6


class SynthConfigError(RuntimeError):
    """Raised when a synthetic fleet cannot be generated."""


class InvalidConfig(SynthConfigError):
    """Raised when synthetic fixture settings are inconsistent."""


@dataclass(frozen=True, slots=True)
class SynthConfig:
    seed: int = 0
    n_failures: int = 4
    n_min: int = 800
    n_max: int = 1200
    parameter_count: int = 10
    n_informative: int = 4
    noise_sigma: float = 0.05
    turbines: tuple[str, ...] = ("T01", "T06", "T07", "T11")
    window_length: int = 24
    horizon: int = 50
    start: str = "2017-01-01T00:00:00"

    def __post_init__(self) -> None:
        object.__setattr__(self, "turbines", tuple(str(item) for item in self.turbines))
        self.validate()

    def validate(self) -> None:
        if self.n_failures < 1:
            raise InvalidConfig("n_failures must be at least 1.")
        if not 1 <= self.n_informative <= self.parameter_count:
            raise InvalidConfig("n_informative must lie between 1 and parameter_count.")
        if self.n_min > self.n_max:
            raise InvalidConfig("n_min must not exceed n_max.")
        if self.n_min < self.window_length + self.horizon + 1:
            raise InvalidConfig(
                f"n_min must be at least window_length + horizon + 1 "
                f"({self.window_length + self.horizon + 1})."
            )
        if self.noise_sigma < 0.0:
            raise InvalidConfig("noise_sigma must be non-negative.")
        if not self.turbines:
            raise InvalidConfig("At least one turbine tag is required.")

    @property
    def n_range(self) -> tuple[int, int]:
        return (self.n_min, self.n_max)

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "SynthConfig":
        payload = dict(values)
        if "n_range" in payload:
            payload["n_min"], payload["n_max"] = payload.pop("n_range")
        if "m" in payload:
            payload["parameter_count"] = payload.pop("m")
        known = {item.name for item in fields(cls)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise InvalidConfig(f"Unknown synthetic config keys: {', '.join(unknown)}")
        try:
            return cls(**payload)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from exc

    @classmethod
    def from_file(cls, path: Path) -> "SynthConfig":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfig(f"Unable to read synthetic config {path}: {exc}") from exc
        if not isinstance(payload, dict):
            raise InvalidConfig(f"Synthetic config {path} must hold a JSON object.")
        return cls.from_mapping(payload)


@dataclass(slots=True)
class SynthFleet:
    config: SynthConfig
    datasets: list[FailureDataset] = field(default_factory=list)
    events: list[FailureEvent] = field(default_factory=list)
    ramps: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(f"p{index + 1}" for index in range(self.config.parameter_count))


def degradation_ramp(n_logs: int) -> np.ndarray:
    life = np.linspace(0.0, 1.0, n_logs) if n_logs > 1 else np.ones(1)
    progress = np.clip((life - HEALTHY_FRACTION) / (1.0 - HEALTHY_FRACTION), 0.0, None)
    return progress**2


def _component_loadings(seed: int, component_index: int, n_informative: int) -> np.ndarray:
    rng = np.random.default_rng([seed, component_index])
    signs = np.where(np.arange(n_informative) % 2 == 0, 1.0, -1.0)
    return signs * rng.uniform(0.5, 1.5, size=n_informative)


def generate(config: SynthConfig) -> SynthFleet:
    rng = np.random.default_rng(config.seed)
    fleet = SynthFleet(config=config)
    columns = config.parameter_count
    offsets = rng.uniform(-5.0, 5.0, size=columns)
    start = np.datetime64(config.start, "ns")
    step = np.timedelta64(int(LOG_INTERVAL.total_seconds()), "s").astype("timedelta64[ns]")
    next_start = {tag: start for tag in config.turbines}

    drafts: list[tuple[str, np.ndarray, FailureComponent, np.ndarray, np.ndarray]] = []
    for position in range(config.n_failures):
        turbine = config.turbines[position % len(config.turbines)]
        component_index = position % len(COMPONENT_CYCLE)
        component = COMPONENT_CYCLE[component_index]
        n_logs = int(rng.integers(config.n_min, config.n_max + 1))

        ramp = degradation_ramp(n_logs)
        amplitude = RAMP_AMPLITUDE * rng.uniform(0.8, 1.2)
        loadings = _component_loadings(config.seed, component_index, config.n_informative)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        daily = np.sin(2.0 * np.pi * np.arange(n_logs) / LOGS_PER_DAY + phase)

        matrix = np.empty((n_logs, columns))
        informative = config.n_informative
        matrix[:, :informative] = (
            offsets[:informative]
            + amplitude * np.outer(ramp, loadings)
            + config.noise_sigma
            * (daily[:, np.newaxis] + rng.standard_normal((n_logs, informative)))
        )
        matrix[:, informative:] = offsets[informative:] + rng.standard_normal(
            (n_logs, columns - informative)
        )

        timestamps = next_start[turbine] + step * np.arange(n_logs)
        next_start[turbine] = timestamps[-1] + step
        drafts.append((turbine, timestamps, component, matrix, ramp))

    # tags follow the (turbine, time) order the failure-log parser assigns
    drafts.sort(key=lambda item: (item[0], item[1][0]))
    for failure_tag, (turbine, timestamps, component, matrix, ramp) in enumerate(drafts, start=1):
        fleet.datasets.append(
            FailureDataset(
                failure_tag=failure_tag,
                turbine_tag=turbine,
                component=component,
                matrix=matrix,
                timestamps=timestamps,
                valid=True,
                columns=fleet.columns,
                remarks=f"Synthetic {component.label.lower()} failure",
            )
        )
        fleet.events.append(
            FailureEvent(
                turbine_tag=turbine,
                timestamp=to_utc_datetime(timestamps[-1]),
                component=component,
                remarks=f"Synthetic {component.label.lower()} failure",
                failure_tag=failure_tag,
            )
        )
        fleet.ramps[failure_tag] = ramp

    logger.info(
        "Generated synthetic fleet.",
        extra={"seed": config.seed, "failures": config.n_failures, "parameters": columns},
    )
    return fleet


def _iso(stamp: datetime) -> str:
    return stamp.strftime("%Y-%m-%dT%H:%M:%SZ")


def scada_frame(fleet: SynthFleet) -> pd.DataFrame:
    frames = []
    for dataset in fleet.datasets:
        frame = pd.DataFrame(dataset.matrix, columns=list(fleet.columns))
        frame.insert(0, "turbine", dataset.turbine_tag)
        frame.insert(0, "timestamp", pd.DatetimeIndex(dataset.timestamps).strftime("%Y-%m-%dT%H:%M:%SZ"))
        frames.append(frame)
    combined = pd.concat(frames, ignore_index=True)
    return combined.sort_values(["turbine", "timestamp"], kind="mergesort").reset_index(drop=True)


def failures_frame(fleet: SynthFleet) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "turbine": event.turbine_tag,
                "timestamp": _iso(event.timestamp),
                "component": event.component.label,
                "remarks": event.remarks,
            }
            for event in fleet.events
        ],
        columns=["turbine", "timestamp", "component", "remarks"],
    )


def write_fixture(fleet: SynthFleet, out_dir: Path) -> dict[str, Path]:
    out_dir = Path(out_dir)
    written = {
        "scada": write_csv_atomic(out_dir / "scada.csv", scada_frame(fleet)),
        "failures": write_csv_atomic(out_dir / "failures.csv", failures_frame(fleet)),
    }
    logger.info("Wrote synthetic fixture.", extra={"out_dir": str(out_dir)})
    return written
