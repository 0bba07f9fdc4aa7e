from pathlib import Path
from typing import Any

from django.core.management.base import CommandParser

from apps.cli.services.command import RulCommand
from apps.evaluation.services.forecasting import forecast
from apps.evaluation.services.reports import write_trace_files
from apps.forenet.services.checkpoint import load_checkpoint_with_metadata
from apps.preprocess.services.store import load_or_build_windowed
from apps.scada_ingest.services.dataset_store import load_failure_datasets
from apps.training.services.errors import TargetNotFound


class Command(RulCommand):
    help = "Run a checkpoint over one failure dataset and write its forecast trace."

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--checkpoint", type=Path, required=True, help="Model checkpoint file.")
        parser.add_argument("--data", type=Path, required=True, help="Ingested dataset directory.")
        parser.add_argument("--target", type=int, required=True, help="Failure tag to forecast.")
        parser.add_argument(
            "--out",
            type=Path,
            help="Trace directory (defaults to <data>/traces/<model>).",
        )
        parser.add_argument("--no-svg", action="store_true", help="Skip the trace chart.")
        self.add_config_argument(parser)

    def handle(self, *args: object, **options: Any) -> None:
        model, metadata = load_checkpoint_with_metadata(options["checkpoint"])
        config = self.load_config(
            options,
            window_length=metadata.get("window_length"),
            horizon=metadata.get("horizon"),
            stride=metadata.get("stride"),
        )
        data_dir: Path = options["data"]
        target = options["target"]
        datasets = {item.failure_tag: item for item in load_failure_datasets(data_dir)}
        if target not in datasets:
            raise TargetNotFound(f"Failure {target} is not among the datasets under {data_dir}.")
        dataset = datasets[target]

        windowed = load_or_build_windowed(
            dataset,
            cache_root=data_dir,
            window_length=config.window_length,
            horizon=config.horizon,
            stride=config.stride,
        )
        trace = forecast(model, windowed)
        architecture = str(model.spec.architecture)
        out_dir: Path = options.get("out") or data_dir / "traces" / architecture
        written = write_trace_files(
            trace,
            out_dir,
            meta={
                "model": architecture,
                "component": dataset.component_label,
                "turbine_tag": dataset.turbine_tag,
                "data_logs_available": dataset.n_logs,
                "checkpoint": str(options["checkpoint"]),
            },
            render_svg=config.render_svg and not options.get("no_svg"),
        )
        self.stdout.write(
            self.style.SUCCESS(
                f"Forecast failure {target} with {architecture}: {len(trace)} predictions "
                f"written to {written['trace']}."
            )
        )
