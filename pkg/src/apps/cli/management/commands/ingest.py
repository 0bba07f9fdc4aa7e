from pathlib import Path
from typing import Any

from django.core.management.base import CommandParser

from apps.cli.services.command import RulCommand
from apps.scada_ingest.services.ingest_service import ScadaIngestService


class Command(RulCommand):
    help = "Parse SCADA and failure-log CSVs into per-failure datasets plus a validity report."

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--scada", type=Path, required=True, help="SCADA log CSV export.")
        parser.add_argument("--failures", type=Path, required=True, help="Failure log CSV.")
        parser.add_argument("--out", type=Path, required=True, help="Dataset output directory.")
        parser.add_argument(
            "--expected-parameters",
            "-m",
            dest="expected_parameters",
            type=int,
            help="Number of SCADA parameter columns each row must carry.",
        )
        parser.add_argument("--min-logs", dest="min_logs", type=int, help="Validity threshold in logs.")
        parser.add_argument("--fw", "--horizon", dest="horizon", type=int, help="Forecast horizon in logs.")
        parser.add_argument("--batch-label", default="", help="Catalog label for this ingest.")
        self.add_config_argument(parser)

    def handle(self, *args: object, **options: Any) -> None:
        config = self.load_config(
            options,
            expected_parameters=options.get("expected_parameters"),
            min_logs=options.get("min_logs"),
            horizon=options.get("horizon"),
        )
        outcome = ScadaIngestService().ingest(
            scada_path=options["scada"],
            failures_path=options["failures"],
            out_dir=options["out"],
            expected_m=config.expected_parameters,
            min_logs=config.resolved_min_logs,
            batch_label=options.get("batch_label") or "",
        )
        valid = outcome.split.valid_datasets
        self.stdout.write(
            self.style.SUCCESS(
                f"Ingested {len(outcome.split.datasets)} failure datasets "
                f"({len(valid)} valid, min_logs={config.resolved_min_logs}) into {options['out']}."
            )
        )
        if outcome.dropped_count:
            self.stdout.write(f"- dropped rows: {outcome.dropped_count}")
        for issue in outcome.split.issues:
            self.stdout.write(f"- {issue.turbine_tag}: {issue.message}")
