from django.apps import AppConfig


class ScadaIngestConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "apps.scada_ingest"
    verbose_name = "SCADA Ingest"
