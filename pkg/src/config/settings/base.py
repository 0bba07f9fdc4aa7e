from pathlib import Path

import environ

env = environ.Env(DEBUG=(bool, False))

BASE_DIR = Path(__file__).resolve().parents[3]

SECRET_KEY = env("DJANGO_SECRET_KEY", default="change-me")
DEBUG = env.bool("DJANGO_DEBUG", default=False)
ALLOWED_HOSTS = env.list("DJANGO_ALLOWED_HOSTS", default=["localhost", "127.0.0.1"])

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "apps.core",
    "apps.scada_ingest",
    "apps.preprocess",
    "apps.tensor_core",
    "apps.forenet",
    "apps.training",
    "apps.evaluation",
    "apps.synth_data",
    "apps.cli",
]

DATABASES = {
    "default": env.db(
        "DATABASE_URL",
        default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}",
    )
}

LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

RUL_LOG_LEVEL = env("RUL_LOG_LEVEL", default="INFO")
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(asctime)s | %(levelname)s | %(name)s | %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "loggers": {
        "apps": {"handlers": ["console"], "level": RUL_LOG_LEVEL, "propagate": False},
    },
}

CELERY_BROKER_URL = env(
    "CELERY_BROKER_URL",
    default="redis://localhost:6379/0",
)
CELERY_RESULT_BACKEND = env(
    "CELERY_RESULT_BACKEND",
    default="redis://localhost:6379/1",
)
CELERY_TASK_TRACK_STARTED = True
CELERY_TASK_ALWAYS_EAGER = env.bool("CELERY_TASK_ALWAYS_EAGER", default=False)
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_TASK_TIME_LIMIT = env.int("CELERY_TASK_TIME_LIMIT", default=6 * 60 * 60)
CELERY_TASK_SOFT_TIME_LIMIT = env.int("CELERY_TASK_SOFT_TIME_LIMIT", default=6 * 60 * 60 - 60)

# Windowing. 2016 logs = 14 days x 24 h x 6 logs/h at the 10-minute SCADA rate.
RUL_LOG_INTERVAL_MINUTES = 10
RUL_WINDOW_LENGTH = env.int("RUL_WINDOW_LENGTH", default=24)
RUL_FORECAST_HORIZON = env.int("RUL_FORECAST_HORIZON", default=2016)
RUL_STRIDE = env.int("RUL_STRIDE", default=1)
RUL_MIN_LOG_MARGIN = env.int("RUL_MIN_LOG_MARGIN", default=100)
RUL_EXPECTED_PARAMETERS = env.int("RUL_EXPECTED_PARAMETERS", default=82)

# Training.
RUL_EPOCHS = env.int("RUL_EPOCHS", default=10)
RUL_BATCH_SIZE = env.int("RUL_BATCH_SIZE", default=32)
RUL_LEARNING_RATE = env.float("RUL_LEARNING_RATE", default=1e-3)
RUL_ADAM_BETA1 = env.float("RUL_ADAM_BETA1", default=0.9)
RUL_ADAM_BETA2 = env.float("RUL_ADAM_BETA2", default=0.999)
RUL_ADAM_EPSILON = env.float("RUL_ADAM_EPSILON", default=1e-8)
RUL_CLIP_NORM = env.float("RUL_CLIP_NORM", default=5.0)
RUL_SEED = env.int("RUL_SEED", default=0)
RUL_SHUFFLE = env.bool("RUL_SHUFFLE", default=True)
RUL_SELECTION = env("RUL_SELECTION", default="dk")
RUL_HOLDOUT_POLICY = env("RUL_HOLDOUT_POLICY", default="target")
RUL_ATTENTION_SCALE = env.bool("RUL_ATTENTION_SCALE", default=False)

# Evaluation.
RUL_CROSSING_THRESHOLD = env.float("RUL_CROSSING_THRESHOLD", default=0.0)
RUL_CORRELATION_METHOD = env("RUL_CORRELATION_METHOD", default="pearson")
RUL_RENDER_SVG = env.bool("RUL_RENDER_SVG", default=True)
