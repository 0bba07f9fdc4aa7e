from django.db import models

from apps.core.models import TimeStampedModel


class FailureComponent(models.TextChoices):
    TRANSFORMER = "transformer", "Transformer"
    HYDRAULIC_GROUP = "hydraulic_group", "Hydraulic group"
    GEARBOX = "gearbox", "Gearbox"
    GENERATOR_BEARING = "generator_bearing", "Generator bearing"
    GENERATOR = "generator", "Generator"
    OTHER = "other", "Other"


class FailureRecord(TimeStampedModel):
    ingest_batch = models.TextField()
    failure_tag = models.PositiveIntegerField()
    turbine_tag = models.CharField(max_length=32)
    component = models.CharField(
        max_length=32,
        choices=FailureComponent.choices,
        default=FailureComponent.OTHER,
    )
    component_detail = models.CharField(max_length=128, blank=True)
    remarks = models.TextField(blank=True)
    failed_at = models.DateTimeField()

    n_logs = models.PositiveIntegerField(default=0)
    is_valid = models.BooleanField(default=False)
    dataset_dir = models.CharField(max_length=500, blank=True)

    class Meta:
        constraints = [
            models.UniqueConstraint(
                fields=("ingest_batch", "failure_tag"),
                name="unique_failure_tag_per_ingest_batch",
            )
        ]
        indexes = [
            models.Index(fields=("turbine_tag", "failed_at"), name="failure_turbine_time_idx"),
            models.Index(fields=("is_valid", "component"), name="failure_valid_component_idx"),
        ]

    def __str__(self) -> str:
        return f"Failure<{self.ingest_batch}:{self.failure_tag}:{self.turbine_tag}>"
