from django.apps import AppConfig


class ForenetConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "apps.forenet"
    verbose_name = "ForeNet Models"
