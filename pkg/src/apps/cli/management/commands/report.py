from pathlib import Path
from typing import Any

from django.core.management.base import CommandParser

from apps.cli.services.command import RulCommand
from apps.core.services.atomic_io import write_csv_atomic, write_json_atomic
from apps.evaluation.services.collect import collect_results
from apps.evaluation.services.correlation import correlation_frame
from apps.evaluation.services.reports import (
    dk_comparison_frame,
    emit_report,
    maintenance_window,
    model_summary_frame,
)
from apps.scada_ingest.services.dataset_store import load_failure_datasets


class Command(RulCommand):
    help = "Write D_k tables, per-model summaries, trace charts and optional correlation matrices."

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--results", type=Path, required=True, help="Directory of forecast traces.")
        parser.add_argument("--out", type=Path, required=True, help="Report output directory.")
        parser.add_argument("--data", type=Path, help="Ingested datasets for correlation matrices.")
        parser.add_argument("--threshold", type=float, help="Crossing threshold on the scaled axis.")
        parser.add_argument("--no-svg", action="store_true", help="Skip the trace charts.")
        self.add_config_argument(parser)

    def handle(self, *args: object, **options: Any) -> None:
        config = self.load_config(options, threshold=options.get("threshold"))
        out_dir: Path = options["out"]
        results = collect_results(options["results"], threshold=config.threshold)
        horizons = {result.trace.horizon for result in results if result.trace is not None}
        horizon = horizons.pop() if len(horizons) == 1 else config.horizon

        written = emit_report(results, out_dir, render_svg=config.render_svg and not options.get("no_svg"))
        written["model_summary"] = write_csv_atomic(out_dir / "model_summary.csv", model_summary_frame(results))
        written["dk_comparison"] = write_csv_atomic(out_dir / "dk_comparison.csv", dk_comparison_frame(results))
        written["maintenance_window"] = write_json_atomic(
            out_dir / "maintenance_window.json",
            maintenance_window(results, horizon=horizon),
        )

        data_dir: Path | None = options.get("data")
        if data_dir is not None:
            for dataset in load_failure_datasets(data_dir):
                written[f"correlation_{dataset.failure_tag}"] = write_csv_atomic(
                    out_dir / f"correlation_{dataset.failure_tag}.csv",
                    correlation_frame(dataset.matrix, dataset.columns, config.correlation_method),
                )

        models = sorted({result.model for result in results})
        targets = sorted({result.failure_tag for result in results})
        self.stdout.write(
            self.style.SUCCESS(
                f"Reported {len(results)} experiments ({len(targets)} targets x {len(models)} models) "
                f"into {out_dir}."
            )
        )
