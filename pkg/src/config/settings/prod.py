from django.core.exceptions import ImproperlyConfigured

from .base import *  # noqa: F401,F403

DEBUG = False

_required_settings = ("SECRET_KEY", "CELERY_BROKER_URL")
_missing_settings = [
    key
    for key in _required_settings
    if str(globals().get(key, "")).strip() in {"", "change-me"}
]
if _missing_settings:
    joined = ", ".join(sorted(_missing_settings))
    raise ImproperlyConfigured(
        "Missing required runtime settings for production startup: "
        f"{joined}"
    )
