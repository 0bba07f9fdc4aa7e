from apps.core.services.atomic_io import ReportIoError, write_csv_atomic, write_json_atomic
from apps.core.services.run_config import RunConfig, RunConfigError

__all__ = [
    "ReportIoError",
    "RunConfig",
    "RunConfigError",
    "write_csv_atomic",
    "write_json_atomic",
]
