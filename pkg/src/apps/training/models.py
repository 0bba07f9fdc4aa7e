from django.db import models

from apps.core.models import TimeStampedModel
from apps.forenet.models import Architecture


class TrainingRunStatus(models.TextChoices):
    PENDING = "pending", "Pending"
    RUNNING = "running", "Running"
    COMPLETED = "completed", "Completed"
    FAILED = "failed", "Failed"
    DIVERGED = "diverged", "Diverged"


class TrainingRun(TimeStampedModel):
    target_tag = models.PositiveIntegerField()
    architecture = models.CharField(max_length=16, choices=Architecture.choices)
    status = models.CharField(
        max_length=16,
        choices=TrainingRunStatus.choices,
        default=TrainingRunStatus.PENDING,
    )
    seed = models.BigIntegerField(default=0)
    data_dir = models.CharField(max_length=500)
    run_dir = models.CharField(max_length=500, blank=True)
    config = models.JSONField(default=dict, blank=True)

    best_epoch = models.PositiveIntegerField(null=True, blank=True)
    best_dk_logs = models.IntegerField(null=True, blank=True)
    qualified_epochs = models.PositiveIntegerField(default=0)
    checkpoint_path = models.CharField(max_length=500, blank=True)
    error_message = models.TextField(blank=True)

    started_at = models.DateTimeField(null=True, blank=True)
    completed_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        indexes = [
            models.Index(fields=("target_tag", "architecture"), name="training_run_target_idx"),
            models.Index(fields=("status", "created_at"), name="training_run_status_idx"),
        ]

    def __str__(self) -> str:
        return f"TrainingRun<{self.id}:{self.architecture}:{self.target_tag}:{self.status}>"


class TrainingEpoch(TimeStampedModel):
    run = models.ForeignKey(
        TrainingRun,
        on_delete=models.CASCADE,
        related_name="epochs",
    )
    epoch = models.PositiveIntegerField()
    train_rmse = models.FloatField()
    test_rmse = models.FloatField(null=True, blank=True)
    test_dk_logs = models.IntegerField(null=True, blank=True)
    qualified = models.BooleanField(default=False)

    class Meta:
        ordering = ("run", "epoch")
        constraints = [
            models.UniqueConstraint(
                fields=("run", "epoch"),
                name="unique_epoch_per_training_run",
            )
        ]

    def __str__(self) -> str:
        return f"TrainingEpoch<{self.run_id}:{self.epoch}>"
