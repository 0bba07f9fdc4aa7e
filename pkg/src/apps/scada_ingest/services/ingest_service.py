import logging
from dataclasses import dataclass, field
from pathlib import Path

from django.db import transaction

from apps.preprocess.services.store import clear_windowed_caches
from apps.scada_ingest.models import FailureRecord
from apps.scada_ingest.services.dataset_store import (
    save_failure_dataset,
    write_ingest_reports,
)
from apps.scada_ingest.services.parser import parse_failures, parse_scada
from apps.scada_ingest.services.records import FailureSplit
from apps.scada_ingest.services.splitter import build_failure_datasets

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class IngestOutcome:
    split: FailureSplit
    dataset_dirs: dict[int, Path] = field(default_factory=dict)
    reports: dict[str, Path] = field(default_factory=dict)
    dropped_count: int = 0
    event_count: int = 0


class ScadaIngestService:
    def ingest(
        self,
        *,
        scada_path: Path,
        failures_path: Path,
        out_dir: Path,
        expected_m: int,
        min_logs: int,
        batch_label: str = "",
    ) -> IngestOutcome:
        records = parse_scada(scada_path, expected_m)
        events = parse_failures(failures_path)
        split = build_failure_datasets(records, events, min_logs)

        outcome = IngestOutcome(
            split=split,
            dropped_count=records.dropped_count,
            event_count=len(events),
        )
        clear_windowed_caches(out_dir)
        for dataset in split.datasets:
            outcome.dataset_dirs[dataset.failure_tag] = save_failure_dataset(dataset, out_dir)
        outcome.reports = write_ingest_reports(
            split=split,
            events=events,
            out_dir=out_dir,
            min_logs=min_logs,
            dropped_count=records.dropped_count,
        )
        self.record_catalog(
            outcome=outcome,
            batch_label=batch_label or str(Path(out_dir).resolve()),
        )
        return outcome

    @staticmethod
    @transaction.atomic
    def record_catalog(*, outcome: IngestOutcome, batch_label: str) -> list[FailureRecord]:
        FailureRecord.objects.filter(ingest_batch=batch_label).delete()
        rows = [
            FailureRecord(
                ingest_batch=batch_label,
                failure_tag=dataset.failure_tag,
                turbine_tag=dataset.turbine_tag,
                component=dataset.component,
                component_detail=dataset.component_detail,
                remarks=dataset.remarks,
                failed_at=dataset.failed_at,
                n_logs=dataset.n_logs,
                is_valid=dataset.valid,
                dataset_dir=str(outcome.dataset_dirs.get(dataset.failure_tag, "")),
            )
            for dataset in outcome.split.datasets
        ]
        created = FailureRecord.objects.bulk_create(rows)
        logger.info(
            "Recorded failure catalog.",
            extra={"ingest_batch": batch_label, "records": len(created)},
        )
        return created
