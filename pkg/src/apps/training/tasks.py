from typing import Any

from celery import shared_task

from apps.core.services.atomic_io import ReportIoError
from apps.core.services.run_config import RunConfigError
from apps.evaluation.services.errors import EvaluationError
from apps.forenet.services.errors import ForeNetError
from apps.preprocess.services.errors import PreprocessError
from apps.scada_ingest.services.records import ScadaIngestError
from apps.tensor_core.services.errors import TensorError
from apps.training.models import TrainingRun, TrainingRunStatus
from apps.training.services.errors import DivergedLoss, TrainingError
from apps.training.services.run_service import TrainingRunService


@shared_task(bind=True, max_retries=0)
def train_target_task(self: Any, run_id: int) -> dict[str, Any]:
    run = TrainingRun.objects.get(id=run_id)
    if run.status != TrainingRunStatus.PENDING:
        return {"status": "skipped", "run_id": run.id, "run_status": run.status}

    service = TrainingRunService()
    try:
        outcome = service.execute(run)
    except DivergedLoss as exc:
        return {"status": "diverged", "run_id": run.id, "epoch": exc.epoch, "error": str(exc)}
    except (
        TrainingError,
        PreprocessError,
        ScadaIngestError,
        ForeNetError,
        EvaluationError,
        ReportIoError,
        TensorError,
        RunConfigError,
    ) as exc:
        return {"status": "failed", "run_id": run.id, "error": str(exc)}

    return {
        "status": "completed",
        "run_id": run.id,
        "target_tag": run.target_tag,
        "best_epoch": outcome.best_epoch,
        "best_dk_logs": outcome.target_dk.dk_logs if outcome.target_dk else None,
    }
