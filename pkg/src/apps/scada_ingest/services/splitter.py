import logging
from collections.abc import Sequence

import numpy as np

from apps.scada_ingest.services.records import (
    LOG_INTERVAL,
    FailureDataset,
    FailureEvent,
    FailureSplit,
    IngestIssue,
    ScadaTable,
    to_datetime64,
)

logger = logging.getLogger(__name__)

_GRID_STEP = np.timedelta64(int(LOG_INTERVAL.total_seconds()), "s")


def build_failure_datasets(
    records: ScadaTable,
    events: Sequence[FailureEvent],
    min_logs: int,
) -> FailureSplit:
    """Cut each turbine stream into run-to-failure lives, one per failure event.

    A life spans the rows after the turbine's previous failure (or the stream
    start) up to and including the failure timestamp.
    """
    split = FailureSplit()
    slices = records.turbine_slices()
    previous_failure: dict[str, np.datetime64] = {}

    for event in sorted(events, key=lambda item: (item.turbine_tag, item.timestamp, item.failure_tag)):
        event_time = to_datetime64(event.timestamp)
        lower_bound = previous_failure.get(event.turbine_tag)
        previous_failure[event.turbine_tag] = event_time

        turbine_slice = slices.get(event.turbine_tag)
        if turbine_slice is None:
            split.issues.append(
                IngestIssue(
                    failure_tag=event.failure_tag,
                    turbine_tag=event.turbine_tag,
                    reason="no_records_for_turbine",
                    message=f"No SCADA records for turbine {event.turbine_tag}.",
                )
            )
            logger.warning(
                "Failure event has no SCADA records for its turbine.",
                extra={"failure_tag": event.failure_tag, "turbine_tag": event.turbine_tag},
            )
            continue

        stamps = records.timestamps[turbine_slice]
        start = 0 if lower_bound is None else int(np.searchsorted(stamps, lower_bound, side="right"))
        stop = int(np.searchsorted(stamps, event_time, side="right"))
        if stop <= start:
            split.issues.append(
                IngestIssue(
                    failure_tag=event.failure_tag,
                    turbine_tag=event.turbine_tag,
                    reason="no_records_in_interval",
                    message=(
                        f"Turbine {event.turbine_tag} has no records between its previous "
                        f"failure and failure {event.failure_tag}."
                    ),
                )
            )
            continue

        life_stamps = stamps[start:stop].copy()
        matrix = records.values[turbine_slice][start:stop].copy()
        matrix.setflags(write=False)
        life_stamps.setflags(write=False)

        gap_count = int(np.count_nonzero(np.diff(life_stamps) > _GRID_STEP))
        lag = event_time - life_stamps[-1]
        if lag > _GRID_STEP:
            logger.warning(
                "Last SCADA log precedes the failure by more than one grid step.",
                extra={"failure_tag": event.failure_tag, "lag_seconds": int(lag // np.timedelta64(1, "s"))},
            )
        if gap_count:
            logger.info(
                "Tolerating timestamp gaps inside failure dataset.",
                extra={"failure_tag": event.failure_tag, "gap_count": gap_count},
            )

        dataset = FailureDataset(
            failure_tag=event.failure_tag,
            turbine_tag=event.turbine_tag,
            component=event.component,
            component_detail=event.component_detail,
            remarks=event.remarks,
            matrix=matrix,
            timestamps=life_stamps,
            columns=records.columns,
            valid=matrix.shape[0] >= min_logs,
            gap_count=gap_count,
        )
        split.datasets.append(dataset)

    split.datasets.sort(key=lambda item: item.failure_tag)
    logger.info(
        "Split SCADA stream into failure datasets.",
        extra={
            "datasets": len(split.datasets),
            "valid": len(split.valid_datasets),
            "issues": len(split.issues),
            "min_logs": min_logs,
        },
    )
    return split
