import json
import logging
from collections import Counter
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from apps.core.services.atomic_io import (
    write_bytes_atomic,
    write_csv_atomic,
    write_json_atomic,
)
from apps.scada_ingest.models import FailureComponent
from apps.scada_ingest.services.records import (
    FailureDataset,
    FailureEvent,
    FailureSplit,
    ScadaIngestError,
)

logger = logging.getLogger(__name__)

FAILURE_DATASET_FORMAT_VERSION = 1
FAILURE_DIR_PREFIX = "failure_"


def failure_dir_name(failure_tag: int) -> str:
    return f"{FAILURE_DIR_PREFIX}{failure_tag:04d}"


def save_failure_dataset(dataset: FailureDataset, root: Path) -> Path:
    target = Path(root) / failure_dir_name(dataset.failure_tag)
    meta: dict[str, Any] = {
        "format_version": FAILURE_DATASET_FORMAT_VERSION,
        "failure_tag": dataset.failure_tag,
        "turbine_tag": dataset.turbine_tag,
        "component": str(dataset.component),
        "component_detail": dataset.component_detail,
        "remarks": dataset.remarks,
        "n_logs": dataset.n_logs,
        "parameter_count": dataset.parameter_count,
        "columns": list(dataset.columns),
        "valid": dataset.valid,
        "gap_count": dataset.gap_count,
    }
    write_bytes_atomic(target / "matrix.bin", dataset.matrix.astype("<f8").tobytes(order="C"))
    write_bytes_atomic(
        target / "timestamps.bin",
        dataset.timestamps.astype("datetime64[ns]").view("<i8").tobytes(),
    )
    write_json_atomic(target / "meta.json", meta)
    return target


def load_failure_dataset(directory: Path) -> FailureDataset:
    directory = Path(directory)
    try:
        meta = json.loads((directory / "meta.json").read_text(encoding="utf-8"))
        raw_matrix = np.fromfile(directory / "matrix.bin", dtype="<f8")
        raw_stamps = np.fromfile(directory / "timestamps.bin", dtype="<i8")
    except (OSError, json.JSONDecodeError) as exc:
        raise ScadaIngestError(f"Unable to read failure dataset at {directory}: {exc}") from exc

    if int(meta.get("format_version", 0)) != FAILURE_DATASET_FORMAT_VERSION:
        raise ScadaIngestError(f"Unsupported failure dataset format at {directory}.")
    n_logs = int(meta["n_logs"])
    parameter_count = int(meta["parameter_count"])
    if raw_matrix.size != n_logs * parameter_count or raw_stamps.size != n_logs:
        raise ScadaIngestError(f"Failure dataset at {directory} is truncated.")

    return FailureDataset(
        failure_tag=int(meta["failure_tag"]),
        turbine_tag=str(meta["turbine_tag"]),
        component=FailureComponent(meta["component"]),
        component_detail=str(meta.get("component_detail", "")),
        remarks=str(meta.get("remarks", "")),
        matrix=raw_matrix.astype(np.float64).reshape(n_logs, parameter_count),
        timestamps=raw_stamps.view("datetime64[ns]"),
        columns=tuple(meta.get("columns", ())),
        valid=bool(meta["valid"]),
        gap_count=int(meta.get("gap_count", 0)),
    )


def load_failure_datasets(root: Path, *, valid_only: bool = False) -> list[FailureDataset]:
    root = Path(root)
    directories = sorted(
        path for path in root.glob(f"{FAILURE_DIR_PREFIX}*") if (path / "meta.json").is_file()
    )
    if not directories:
        raise ScadaIngestError(f"No failure datasets found under {root}.")
    datasets = [load_failure_dataset(path) for path in directories]
    if valid_only:
        datasets = [dataset for dataset in datasets if dataset.valid]
    return sorted(datasets, key=lambda item: item.failure_tag)


def validity_frame(split: FailureSplit, min_logs: int) -> pd.DataFrame:
    rows = []
    for dataset in split.datasets:
        rows.append(
            {
                "turbine_tag": dataset.turbine_tag,
                "failure_location": dataset.component_label,
                "failure_detail": dataset.remarks,
                "failure_tag": dataset.failure_tag,
                "n_logs": dataset.n_logs,
                "valid": "yes" if dataset.valid else "no",
                "reason": "" if dataset.valid else f"fewer than {min_logs} logs",
            }
        )
    for issue in split.issues:
        rows.append(
            {
                "turbine_tag": issue.turbine_tag,
                "failure_location": "",
                "failure_detail": issue.message,
                "failure_tag": issue.failure_tag,
                "n_logs": 0,
                "valid": "no",
                "reason": issue.reason,
            }
        )
    columns = [
        "turbine_tag",
        "failure_location",
        "failure_detail",
        "failure_tag",
        "n_logs",
        "valid",
        "reason",
    ]
    frame = pd.DataFrame(rows, columns=columns)
    return frame.sort_values("failure_tag", kind="mergesort").reset_index(drop=True)


def turbine_tally_frame(events: Sequence[FailureEvent]) -> pd.DataFrame:
    tally = Counter(event.turbine_tag for event in events)
    return pd.DataFrame(
        [{"turbine_tag": tag, "failures": tally[tag]} for tag in sorted(tally)],
        columns=["turbine_tag", "failures"],
    )


def write_ingest_reports(
    *,
    split: FailureSplit,
    events: Sequence[FailureEvent],
    out_dir: Path,
    min_logs: int,
    dropped_count: int,
) -> dict[str, Path]:
    out_dir = Path(out_dir)
    validity_path = write_csv_atomic(out_dir / "validity_report.csv", validity_frame(split, min_logs))
    tally_path = write_csv_atomic(out_dir / "turbine_tally.csv", turbine_tally_frame(events))
    summary_path = write_json_atomic(
        out_dir / "ingest_report.json",
        {
            "events": len(events),
            "datasets": len(split.datasets),
            "valid_datasets": len(split.valid_datasets),
            "dropped_rows": dropped_count,
            "min_logs": min_logs,
            "issues": [
                {
                    "failure_tag": issue.failure_tag,
                    "turbine_tag": issue.turbine_tag,
                    "reason": issue.reason,
                    "message": issue.message,
                }
                for issue in split.issues
            ],
        },
    )
    logger.info("Wrote ingest reports.", extra={"out_dir": str(out_dir)})
    return {"validity": validity_path, "tally": tally_path, "summary": summary_path}
