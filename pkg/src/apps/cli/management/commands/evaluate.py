from pathlib import Path
from typing import Any

from django.core.management.base import CommandParser

from apps.cli.services.command import RulCommand
from apps.core.services.atomic_io import write_csv_atomic
from apps.evaluation.services.collect import collect_results
from apps.evaluation.services.reports import dk_table_frame


class Command(RulCommand):
    help = "Locate each trace's forecasted failure and tabulate D_k against the actual failure."

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--traces", type=Path, required=True, help="Directory searched for trace CSVs.")
        parser.add_argument("--out", type=Path, help="Where dk_table.csv goes (defaults to --traces).")
        parser.add_argument("--threshold", type=float, help="Crossing threshold on the scaled axis.")
        self.add_config_argument(parser)

    def handle(self, *args: object, **options: Any) -> None:
        config = self.load_config(options, threshold=options.get("threshold"))
        traces_dir: Path = options["traces"]
        results = collect_results(traces_dir, threshold=config.threshold)
        out_dir: Path = options.get("out") or traces_dir
        table = write_csv_atomic(out_dir / "dk_table.csv", dk_table_frame(results))

        for result in results:
            rendered = result.as_row()["rendered"]
            self.stdout.write(f"- failure {result.failure_tag} [{result.model}]: {rendered}")
        self.stdout.write(self.style.SUCCESS(f"Evaluated {len(results)} traces into {table}."))
