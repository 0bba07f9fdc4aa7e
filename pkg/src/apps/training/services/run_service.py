import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from django.db import transaction
from django.utils import timezone

from apps.core.services.atomic_io import write_json_atomic
from apps.core.services.run_config import RunConfig
from apps.forenet.models import Architecture
from apps.forenet.services.architectures import ModelSpec
from apps.forenet.services.checkpoint import save_checkpoint
from apps.preprocess.services.store import load_or_build_windowed
from apps.preprocess.services.windowing import WindowedDataset
from apps.scada_ingest.services.dataset_store import failure_dir_name, load_failure_datasets
from apps.training.models import TrainingEpoch, TrainingRun, TrainingRunStatus
from apps.training.services.config import TrainConfig
from apps.training.services.errors import DivergedLoss, NoTrainingData
from apps.training.services.trainer import (
    EpochRecord,
    TrainOutcome,
    train_leave_one_out,
    write_training_log,
)

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "checkpoint.fnet"
LAST_CHECKPOINT_NAME = "last.fnet"


def run_directory(root: Path, architecture: str, target_tag: int) -> Path:
    return Path(root) / str(Architecture(architecture)) / failure_dir_name(target_tag)


def load_windowed_fleet(data_dir: Path, config: RunConfig) -> list[WindowedDataset]:
    datasets = load_failure_datasets(data_dir, valid_only=True)
    if not datasets:
        raise NoTrainingData(f"No valid failure datasets under {data_dir}.")
    return [
        load_or_build_windowed(
            dataset,
            cache_root=Path(data_dir),
            window_length=config.window_length,
            horizon=config.horizon,
            stride=config.stride,
        )
        for dataset in datasets
    ]


@dataclass(slots=True)
class TrainingArtifacts:
    run_dir: Path
    checkpoint: Path | None = None
    last_checkpoint: Path | None = None
    files: dict[str, Path] = field(default_factory=dict)


class TrainingRunService:
    def create_run(
        self,
        *,
        target_tag: int,
        architecture: str,
        data_dir: Path,
        run_root: Path,
        config: RunConfig,
    ) -> TrainingRun:
        run = TrainingRun.objects.create(
            target_tag=target_tag,
            architecture=Architecture(architecture),
            status=TrainingRunStatus.PENDING,
            seed=config.seed,
            data_dir=str(Path(data_dir)),
            run_dir=str(run_directory(run_root, architecture, target_tag)),
            config=config.as_dict(),
        )
        logger.info(
            "Created training run.",
            extra={"run_id": run.id, "target": target_tag, "architecture": run.architecture},
        )
        return run

    def execute(self, run: TrainingRun) -> TrainOutcome:
        run.status = TrainingRunStatus.RUNNING
        run.started_at = timezone.now()
        run.error_message = ""
        run.save(update_fields=["status", "started_at", "error_message", "updated_at"])
        run.epochs.all().delete()

        try:
            config = RunConfig.from_mapping(run.config)
            windowed = load_windowed_fleet(Path(run.data_dir), config)
            spec = ModelSpec.for_window(
                run.architecture,
                window_length=config.window_length,
                parameter_count=windowed[0].parameter_count,
                seed=config.seed,
                attention_scale=config.attention_scale,
            )
            outcome = train_leave_one_out(
                windowed,
                run.target_tag,
                spec,
                TrainConfig.from_run_config(config),
                on_epoch=lambda record: self.record_epoch(run=run, record=record),
            )
            artifacts = self.write_artifacts(run=run, outcome=outcome, config=config)
        except DivergedLoss as exc:
            self._finish(run, TrainingRunStatus.DIVERGED, error_message=str(exc))
            raise
        except Exception as exc:
            self._finish(run, TrainingRunStatus.FAILED, error_message=str(exc))
            raise

        run.best_epoch = outcome.best_epoch
        run.best_dk_logs = outcome.target_dk.dk_logs if outcome.target_dk else None
        run.qualified_epochs = sum(1 for record in outcome.records if record.qualified)
        run.checkpoint_path = str(artifacts.checkpoint or "")
        run.save(
            update_fields=[
                "best_epoch",
                "best_dk_logs",
                "qualified_epochs",
                "checkpoint_path",
                "updated_at",
            ]
        )
        self._finish(run, TrainingRunStatus.COMPLETED)
        logger.info(
            "Training run completed.",
            extra={"run_id": run.id, "best_epoch": outcome.best_epoch, "message": outcome.message},
        )
        return outcome

    @staticmethod
    @transaction.atomic
    def record_epoch(*, run: TrainingRun, record: EpochRecord) -> TrainingEpoch:
        return TrainingEpoch.objects.create(
            run=run,
            epoch=record.epoch,
            train_rmse=record.train_rmse,
            test_rmse=record.test_rmse,
            test_dk_logs=record.test_dk_logs,
            qualified=record.qualified,
        )

    def write_artifacts(
        self,
        *,
        run: TrainingRun,
        outcome: TrainOutcome,
        config: RunConfig,
    ) -> TrainingArtifacts:
        run_dir = Path(run.run_dir)
        artifacts = TrainingArtifacts(run_dir=run_dir)
        metadata: dict[str, Any] = {
            "target_tag": run.target_tag,
            "window_length": config.window_length,
            "horizon": config.horizon,
            "stride": config.stride,
        }
        if outcome.best_model is not None:
            artifacts.checkpoint = save_checkpoint(
                outcome.best_model,
                run_dir / CHECKPOINT_NAME,
                metadata={**metadata, "epoch": outcome.best_epoch},
            )
        else:
            (run_dir / CHECKPOINT_NAME).unlink(missing_ok=True)
        if outcome.final_model is not None:
            artifacts.last_checkpoint = save_checkpoint(
                outcome.final_model,
                run_dir / LAST_CHECKPOINT_NAME,
                metadata={**metadata, "epoch": len(outcome.records)},
            )
        artifacts.files["training_log"] = write_training_log(
            outcome.records, run_dir / "training_log.csv"
        )
        artifacts.files["outcome"] = write_json_atomic(
            run_dir / "outcome.json",
            {
                "target_tag": outcome.target_failure_tag,
                "qualification_tag": outcome.qualification_tag,
                "architecture": run.architecture,
                "best_epoch": outcome.best_epoch,
                "qualified": outcome.qualified,
                "message": outcome.message,
                "initial_rmse": outcome.initial_rmse,
                "target_dk_logs": outcome.target_dk.dk_logs if outcome.target_dk else None,
                "config": config.as_dict(),
            },
        )
        return artifacts

    @staticmethod
    def _finish(run: TrainingRun, status: str, *, error_message: str = "") -> None:
        run.status = status
        run.error_message = error_message
        run.completed_at = timezone.now()
        run.save(update_fields=["status", "error_message", "completed_at", "updated_at"])
