from .base import *  # noqa: F401,F403
from .base import env

DEBUG = True

# Desk runs execute Celery groups in-process unless a broker is wired up.
CELERY_TASK_ALWAYS_EAGER = env.bool("CELERY_TASK_ALWAYS_EAGER", default=True)
