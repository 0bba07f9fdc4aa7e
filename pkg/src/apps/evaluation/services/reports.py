import json
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from apps.core.services.atomic_io import write_csv_atomic, write_json_atomic
from apps.evaluation.services.charts import render_trace_svg
from apps.evaluation.services.dk import MINUTES_PER_DAY, LOG_MINUTES, DkResult, render_duration
from apps.evaluation.services.errors import TraceFormatError
from apps.evaluation.services.forecasting import ForecastTrace

logger = logging.getLogger(__name__)

DK_TABLE_COLUMNS = [
    "failure_tag",
    "model",
    "data_logs_available",
    "component",
    "dk_logs",
    "dk_minutes",
    "rendered",
]
TRACE_COLUMNS = ["log_index", "predicted", "target"]
NO_FORECAST_TEXT = "no forecasted failure"


@dataclass(frozen=True, slots=True)
class ExperimentResult:
    failure_tag: int
    model: str
    data_logs_available: int
    component: str
    dk: DkResult | None
    trace: ForecastTrace | None = None

    def as_row(self) -> dict[str, Any]:
        return {
            "failure_tag": self.failure_tag,
            "model": self.model,
            "data_logs_available": self.data_logs_available,
            "component": self.component,
            "dk_logs": self.dk.dk_logs if self.dk else None,
            "dk_minutes": self.dk.dk_minutes if self.dk else None,
            "rendered": self.dk.rendered if self.dk else NO_FORECAST_TEXT,
        }


def trace_file_stem(failure_tag: int) -> str:
    return f"trace_{failure_tag}"


def trace_frame(trace: ForecastTrace) -> pd.DataFrame:
    return pd.DataFrame(
        {
            # reported log tallies are 1-based
            "log_index": trace.log_indices.astype(np.int64) + 1,
            "predicted": trace.predictions,
            "target": trace.targets,
        },
        columns=TRACE_COLUMNS,
    )


def write_trace_files(
    trace: ForecastTrace,
    directory: Path,
    *,
    meta: dict[str, Any],
    render_svg: bool = False,
) -> dict[str, Path]:
    directory = Path(directory)
    stem = trace_file_stem(trace.failure_tag)
    written = {"trace": write_csv_atomic(directory / f"{stem}.csv", trace_frame(trace))}
    sidecar = {
        **meta,
        "failure_tag": trace.failure_tag,
        "window_length": trace.window_length,
        "horizon": trace.horizon,
        "actual_failure_index": trace.actual_failure_index,
    }
    written["meta"] = write_json_atomic(directory / f"{stem}.json", sidecar)
    if render_svg:
        title = f"Failure {trace.failure_tag} ({meta.get('model', '')})".replace(" ()", "")
        written["svg"] = render_trace_svg(trace, directory / f"{stem}.svg", title=title)
    return written


def read_trace_files(csv_path: Path) -> tuple[ForecastTrace, dict[str, Any]]:
    csv_path = Path(csv_path)
    meta_path = csv_path.with_suffix(".json")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        frame = pd.read_csv(csv_path)
    except (OSError, json.JSONDecodeError, pd.errors.ParserError) as exc:
        raise TraceFormatError(f"Unable to read trace {csv_path}: {exc}") from exc
    missing = set(TRACE_COLUMNS) - set(frame.columns)
    if missing:
        raise TraceFormatError(f"Trace {csv_path} lacks columns: {', '.join(sorted(missing))}.")
    try:
        trace = ForecastTrace(
            failure_tag=int(meta["failure_tag"]),
            predictions=frame["predicted"].to_numpy(dtype=np.float64),
            targets=frame["target"].to_numpy(dtype=np.float64),
            log_indices=frame["log_index"].to_numpy(dtype=np.int64) - 1,
            window_length=int(meta["window_length"]),
            horizon=int(meta["horizon"]),
            actual_failure_index=int(meta["actual_failure_index"]),
        )
    except KeyError as exc:
        raise TraceFormatError(f"Trace metadata {meta_path} lacks {exc}.") from exc
    return trace, meta


def dk_table_frame(results: Sequence[ExperimentResult]) -> pd.DataFrame:
    frame = pd.DataFrame([result.as_row() for result in results], columns=DK_TABLE_COLUMNS)
    frame = frame.astype({"dk_logs": "Int64", "dk_minutes": "Int64"})
    return frame.sort_values(["failure_tag", "model"], kind="mergesort").reset_index(drop=True)


def model_summary_frame(results: Sequence[ExperimentResult]) -> pd.DataFrame:
    rows = []
    models = sorted({result.model for result in results})
    for model in models:
        picked = [result for result in results if result.model == model]
        magnitudes = [abs(result.dk.dk_logs) for result in picked if result.dk is not None]
        mean_logs = float(np.mean(magnitudes)) if magnitudes else math.nan
        rows.append(
            {
                "model": model,
                "targets": len(picked),
                "forecasted": len(magnitudes),
                "mean_abs_dk_logs": mean_logs,
                "mean_abs_dk_minutes": mean_logs * LOG_MINUTES if magnitudes else math.nan,
                "rendered": render_duration(round(mean_logs * LOG_MINUTES)) if magnitudes else NO_FORECAST_TEXT,
            }
        )
    frame = pd.DataFrame(
        rows,
        columns=["model", "targets", "forecasted", "mean_abs_dk_logs", "mean_abs_dk_minutes", "rendered"],
    )
    return frame.sort_values(
        ["mean_abs_dk_logs", "model"], kind="mergesort", na_position="last"
    ).reset_index(drop=True)


def dk_comparison_frame(results: Sequence[ExperimentResult]) -> pd.DataFrame:
    table = dk_table_frame(results)
    if table.empty:
        return pd.DataFrame(columns=["failure_tag", "component", "data_logs_available"])
    base = (
        table[["failure_tag", "component", "data_logs_available"]]
        .drop_duplicates("failure_tag")
        .set_index("failure_tag")
    )
    pivot = table.pivot(index="failure_tag", columns="model", values="dk_logs")
    pivot.columns = [f"dk_logs_{name}" for name in pivot.columns]
    return base.join(pivot).reset_index().sort_values("failure_tag", kind="mergesort")


def maintenance_window(results: Sequence[ExperimentResult], *, horizon: int) -> dict[str, Any]:
    """Forecast horizon less the worst observed disparity, in whole days."""
    magnitudes = [abs(result.dk.dk_logs) for result in results if result.dk is not None]
    horizon_minutes = horizon * LOG_MINUTES
    worst_logs = max(magnitudes) if magnitudes else None
    payload: dict[str, Any] = {
        "horizon_logs": horizon,
        "horizon_minutes": horizon_minutes,
        "horizon_rendered": render_duration(horizon_minutes),
        "experiments": len(results),
        "forecasted": len(magnitudes),
        "worst_abs_dk_logs": worst_logs,
        "reliable_window_days": None,
    }
    if worst_logs is not None:
        worst_days = math.ceil(worst_logs * LOG_MINUTES / MINUTES_PER_DAY)
        payload["worst_abs_dk_rendered"] = render_duration(worst_logs * LOG_MINUTES)
        payload["reliable_window_days"] = max(horizon_minutes // MINUTES_PER_DAY - worst_days, 0)
    return payload


def emit_report(
    results: Sequence[ExperimentResult],
    out_dir: Path,
    *,
    render_svg: bool = True,
) -> dict[str, Path]:
    out_dir = Path(out_dir)
    written = {"dk_table": write_csv_atomic(out_dir / "dk_table.csv", dk_table_frame(results))}
    for result in results:
        if result.trace is None:
            continue
        files = write_trace_files(
            result.trace,
            out_dir / result.model,
            meta={"model": result.model, "component": result.component},
            render_svg=render_svg,
        )
        written[f"{result.model}/{trace_file_stem(result.failure_tag)}"] = files["trace"]
    logger.info(
        "Wrote forecast report.",
        extra={"out_dir": str(out_dir), "experiments": len(results)},
    )
    return written
