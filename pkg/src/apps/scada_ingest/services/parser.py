import logging
import re
from pathlib import Path

import numpy as np
import pandas as pd

from apps.scada_ingest.models import FailureComponent
from apps.scada_ingest.services.records import (
    EmptyFile,
    FailureEvent,
    MalformedHeader,
    MalformedTimestamp,
    NonMonotonicTimestamps,
    ScadaIngestError,
    ScadaTable,
    to_utc_datetime,
)

logger = logging.getLogger(__name__)

TIMESTAMP_HEADERS = frozenset({"timestamp"})
TURBINE_HEADERS = frozenset({"turbine", "turbine_tag"})

COMPONENT_ALIASES: dict[str, FailureComponent] = {
    "transformer": FailureComponent.TRANSFORMER,
    "hydraulicgroup": FailureComponent.HYDRAULIC_GROUP,
    "gearbox": FailureComponent.GEARBOX,
    "generatorbearing": FailureComponent.GENERATOR_BEARING,
    "generator": FailureComponent.GENERATOR,
}
_NON_LETTERS = re.compile(r"[^a-z]")


def parse_scada(path: Path, expected_m: int) -> ScadaTable:
    frame = _read_csv(path)
    if frame is None or frame.shape[1] == 0:
        raise EmptyFile(f"SCADA file {path} is empty.")

    if frame.shape[1] != expected_m + 2:
        raise MalformedHeader(
            f"SCADA file {path} has {frame.shape[1]} columns; "
            f"expected timestamp, turbine and {expected_m} parameters."
        )
    headers = [str(name).strip() for name in frame.columns]
    if headers[0].lower() not in TIMESTAMP_HEADERS or headers[1].lower() not in TURBINE_HEADERS:
        raise MalformedHeader(
            f"SCADA file {path} must start with timestamp and turbine columns, got "
            f"{headers[0]!r}, {headers[1]!r}."
        )
    if frame.empty:
        raise EmptyFile(f"SCADA file {path} has a header but no data rows.")

    timestamps = pd.to_datetime(
        frame.iloc[:, 0].str.strip(),
        utc=True,
        errors="coerce",
        format="ISO8601",
    )
    turbines = frame.iloc[:, 1].str.strip()
    numeric_values = _numeric_block(frame.iloc[:, 2:])

    keep = (
        timestamps.notna().to_numpy()
        & turbines.ne("").to_numpy()
        & np.isfinite(numeric_values).all(axis=1)
    )
    dropped_count = int((~keep).sum())
    if dropped_count:
        logger.warning(
            "Dropped SCADA rows with missing or unparseable cells.",
            extra={"path": str(path), "dropped_count": dropped_count},
        )

    kept = pd.DataFrame(
        {
            "turbine": turbines[keep].to_numpy(dtype=object),
            "timestamp": timestamps[keep].dt.tz_localize(None).to_numpy(),
        }
    )
    kept_values = numeric_values[keep]
    order = kept.sort_values(["turbine", "timestamp"], kind="mergesort").index.to_numpy()
    kept = kept.iloc[order].reset_index(drop=True)
    kept_values = kept_values[order]

    duplicated = kept.duplicated(subset=["turbine", "timestamp"])
    if duplicated.any():
        first = kept[duplicated].iloc[0]
        raise NonMonotonicTimestamps(
            f"Turbine {first['turbine']} repeats timestamp "
            f"{to_utc_datetime(first['timestamp']).isoformat()} in {path}."
        )

    table = ScadaTable(
        columns=tuple(headers[2:]),
        timestamps=kept["timestamp"].to_numpy(dtype="datetime64[ns]"),
        turbine_tags=kept["turbine"].to_numpy(dtype=object),
        values=np.ascontiguousarray(kept_values, dtype=np.float64),
        dropped_count=dropped_count,
    )
    logger.info(
        "Parsed SCADA export.",
        extra={
            "path": str(path),
            "records": len(table),
            "parameters": table.parameter_count,
            "turbines": len(table.turbine_slices()),
        },
    )
    return table


def parse_failures(path: Path) -> list[FailureEvent]:
    frame = _read_csv(path)
    if frame is None or frame.empty:
        return []

    frame.columns = [str(name).strip().lower() for name in frame.columns]
    frame = frame.rename(columns={"turbine_tag": "turbine"})
    missing = {"turbine", "timestamp", "component"} - set(frame.columns)
    if missing:
        raise MalformedHeader(
            f"Failure log {path} is missing columns: {', '.join(sorted(missing))}."
        )
    if "remarks" not in frame.columns:
        frame["remarks"] = ""

    parsed = pd.to_datetime(
        frame["timestamp"].str.strip(),
        utc=True,
        errors="coerce",
        format="ISO8601",
    )
    if parsed.isna().any():
        row = int(np.flatnonzero(parsed.isna().to_numpy())[0])
        raise MalformedTimestamp(
            f"Failure log {path} row {row + 1} (line {row + 2}) has an unparseable "
            f"timestamp {frame['timestamp'].iloc[row]!r}."
        )

    frame = frame.assign(
        turbine=frame["turbine"].str.strip(),
        parsed=parsed.dt.tz_localize(None),
    )
    frame = frame.sort_values(["turbine", "parsed"], kind="mergesort").reset_index(drop=True)

    events: list[FailureEvent] = []
    for position, row in enumerate(frame.itertuples(index=False), start=1):
        component, detail = component_from_text(str(row.component))
        events.append(
            FailureEvent(
                turbine_tag=str(row.turbine),
                timestamp=to_utc_datetime(row.parsed.to_datetime64()),
                component=component,
                component_detail=detail,
                remarks=str(row.remarks).strip(),
                failure_tag=position,
            )
        )
    logger.info("Parsed failure log.", extra={"path": str(path), "events": len(events)})
    return events


def component_from_text(raw: str) -> tuple[FailureComponent, str]:
    normalized = _NON_LETTERS.sub("", raw.lower())
    component = COMPONENT_ALIASES.get(normalized)
    if component is None:
        return FailureComponent.OTHER, raw.strip()
    return component, ""


def _read_csv(path: Path) -> pd.DataFrame | None:
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        return None
    except FileNotFoundError as exc:
        raise ScadaIngestError(f"Input file not found: {path}") from exc


def _numeric_block(frame: pd.DataFrame) -> np.ndarray:
    try:
        # exact decimal-to-double conversion when every cell is numeric
        return frame.to_numpy(dtype=np.float64)
    except ValueError:
        coerced = frame.apply(lambda column: pd.to_numeric(column, errors="coerce"))
        return coerced.to_numpy(dtype=np.float64)
