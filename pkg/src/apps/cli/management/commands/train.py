from pathlib import Path
from typing import Any

from celery import group
from django.core.management.base import CommandError, CommandParser

from apps.cli.services.command import EXIT_DATA, EXIT_DIVERGED, EXIT_USAGE, RulCommand, architecture_arg
from apps.core.services.run_config import RunConfig
from apps.forenet.models import Architecture
from apps.scada_ingest.services.dataset_store import load_failure_datasets
from apps.training.models import TrainingRun
from apps.training.services.run_service import TrainingRunService
from apps.training.services.trainer import TrainOutcome
from apps.training.tasks import train_target_task


class Command(RulCommand):
    help = "Leave-one-failure-out training: train on every failure but the target, keep the best preemptive epoch."

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--data", type=Path, required=True, help="Ingested dataset directory.")
        parser.add_argument("--target", type=int, help="Failure tag held out for evaluation.")
        parser.add_argument(
            "--all-targets",
            action="store_true",
            help="Run one experiment per valid failure, one worker each.",
        )
        parser.add_argument(
            "--model",
            type=architecture_arg,
            default=Architecture.FORENET_2D,
            help="forenet2d, forenet3d, cnn, lstm, cnn-lstm, cnn-am, lstm-am, cnn-m or linear.",
        )
        parser.add_argument("--out", type=Path, help="Run directory root (defaults to <data>/runs).")
        parser.add_argument("--fw", "--horizon", dest="horizon", type=int, help="Forecast horizon in logs.")
        parser.add_argument("--window-length", "--sw", dest="window_length", type=int)
        parser.add_argument("--epochs", type=int)
        parser.add_argument("--seed", type=int)
        self.add_config_argument(parser)

    def handle(self, *args: object, **options: Any) -> None:
        target = options.get("target")
        all_targets = bool(options.get("all_targets"))
        if target is None and not all_targets:
            raise CommandError("Error: one of --target or --all-targets is required.", returncode=EXIT_USAGE)
        if target is not None and all_targets:
            raise CommandError("Error: --target and --all-targets are exclusive.", returncode=EXIT_USAGE)

        config = self.load_config(
            options,
            horizon=options.get("horizon"),
            window_length=options.get("window_length"),
            epochs=options.get("epochs"),
            seed=options.get("seed"),
        )
        data_dir: Path = options["data"]
        run_root: Path = options.get("out") or data_dir / "runs"
        architecture: Architecture = options["model"]
        service = TrainingRunService()

        if not all_targets:
            run = service.create_run(
                target_tag=target,
                architecture=architecture,
                data_dir=data_dir,
                run_root=run_root,
                config=config,
            )
            outcome = service.execute(run)
            self._report_run(run, outcome)
            return

        self._train_all(service, data_dir=data_dir, run_root=run_root, architecture=architecture, config=config)

    def _train_all(
        self,
        service: TrainingRunService,
        *,
        data_dir: Path,
        run_root: Path,
        architecture: Architecture,
        config: RunConfig,
    ) -> None:
        tags = [dataset.failure_tag for dataset in load_failure_datasets(data_dir, valid_only=True)]
        runs = [
            service.create_run(
                target_tag=tag,
                architecture=architecture,
                data_dir=data_dir,
                run_root=run_root,
                config=config,
            )
            for tag in tags
        ]
        results = group(train_target_task.s(run.id) for run in runs).apply_async().get()

        statuses = [result.get("status") for result in results]
        for result in results:
            self.stdout.write(
                f"- run {result.get('run_id')}: {result.get('status')} "
                f"(target={result.get('target_tag', '-')}, best_epoch={result.get('best_epoch', '-')}, "
                f"dk_logs={result.get('best_dk_logs', '-')})"
            )
        if "diverged" in statuses:
            raise CommandError("At least one training run diverged.", returncode=EXIT_DIVERGED)
        if "failed" in statuses:
            raise CommandError("At least one training run failed.", returncode=EXIT_DATA)
        self.stdout.write(
            self.style.SUCCESS(f"Trained {len(runs)} leave-one-out experiments for {architecture.label}.")
        )

    def _report_run(self, run: TrainingRun, outcome: TrainOutcome) -> None:
        for record in outcome.records:
            dk_text = "-" if record.test_dk_logs is None else str(record.test_dk_logs)
            marker = " *" if record.epoch == outcome.best_epoch else ""
            self.stdout.write(
                f"- epoch {record.epoch}: train_rmse={record.train_rmse:.6f} dk_logs={dk_text}"
                f" qualified={record.qualified}{marker}"
            )
        style = self.style.SUCCESS if outcome.qualified else self.style.WARNING
        self.stdout.write(style(f"{outcome.message} Artifacts in {run.run_dir}."))
