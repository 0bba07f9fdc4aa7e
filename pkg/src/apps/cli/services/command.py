import argparse
import json
import sys
from pathlib import Path
from typing import Any, NoReturn

from django.core.management.base import BaseCommand, CommandError, CommandParser

from apps.core.services.atomic_io import ReportIoError
from apps.core.services.run_config import RunConfig, RunConfigError, describe_defaults
from apps.evaluation.services.errors import EvaluationError
from apps.forenet.models import Architecture
from apps.forenet.services.checkpoint import CHECKPOINT_FORMAT_VERSION
from apps.forenet.services.errors import ForeNetError, UnsupportedShape
from apps.preprocess.services.errors import PreprocessError
from apps.preprocess.services.store import WINDOWED_FORMAT_VERSION
from apps.scada_ingest.services.dataset_store import FAILURE_DATASET_FORMAT_VERSION
from apps.scada_ingest.services.records import ScadaIngestError
from apps.synth_data.services.generator import SynthConfigError
from apps.tensor_core.services.errors import TensorError
from apps.training.services.errors import DivergedLoss, TrainingError

PACKAGE_VERSION = "0.1.0"

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DIVERGED = 3

USAGE_ERRORS: tuple[type[Exception], ...] = (RunConfigError, SynthConfigError, UnsupportedShape)
DATA_ERRORS: tuple[type[Exception], ...] = (
    ScadaIngestError,
    PreprocessError,
    TensorError,
    ForeNetError,
    TrainingError,
    EvaluationError,
    ReportIoError,
)


def exit_code_for(exc: Exception) -> int | None:
    if isinstance(exc, DivergedLoss):
        return EXIT_DIVERGED
    if isinstance(exc, USAGE_ERRORS):
        return EXIT_USAGE
    if isinstance(exc, DATA_ERRORS):
        return EXIT_DATA
    return None


def error_line(exc: BaseException, exit_code: int) -> str:
    return json.dumps(
        {"error": type(exc).__name__, "exit_code": exit_code, "message": str(exc)},
        sort_keys=True,
    )


def architecture_arg(value: str) -> Architecture:
    normalized = value.strip().lower().replace("-", "_")
    aliases = {"forenet_2d": "forenet2d", "forenet_3d": "forenet3d"}
    try:
        return Architecture(aliases.get(normalized, normalized))
    except ValueError as exc:
        options = ", ".join(choice.replace("_", "-") for choice in Architecture.values)
        raise argparse.ArgumentTypeError(f"unknown model {value!r} (choose from {options})") from exc


def format_versions() -> str:
    return (
        f"scada-rul-forecaster {PACKAGE_VERSION} "
        f"(checkpoint format {CHECKPOINT_FORMAT_VERSION}, "
        f"windowed dataset format {WINDOWED_FORMAT_VERSION}, "
        f"failure dataset format {FAILURE_DATASET_FORMAT_VERSION})"
    )


class RulCommand(BaseCommand):
    requires_system_checks: list[str] = []

    def get_version(self) -> str:
        return format_versions()

    def create_parser(self, prog_name: str, subcommand: str, **kwargs: Any) -> CommandParser:
        kwargs.setdefault("epilog", f"Config defaults: {describe_defaults()}")
        parser = super().create_parser(prog_name, subcommand, **kwargs)

        def usage_error(message: str) -> NoReturn:
            if parser.called_from_command_line:
                parser.print_usage(sys.stderr)
                error = CommandError(f"Error: {message}", returncode=EXIT_USAGE)
                sys.stderr.write(error_line(error, EXIT_USAGE) + "\n")
                sys.exit(EXIT_USAGE)
            raise CommandError(f"Error: {message}", returncode=EXIT_USAGE)

        parser.error = usage_error  # type: ignore[method-assign]
        return parser

    def add_config_argument(self, parser: CommandParser) -> None:
        parser.add_argument("--config", type=Path, help="Flat JSON document of tunables.")

    def load_config(self, options: dict[str, Any], **overrides: Any) -> RunConfig:
        return RunConfig.load(config_path=options.get("config"), overrides=overrides)

    def execute(self, *args: Any, **options: Any) -> str | None:
        try:
            return super().execute(*args, **options)
        except CommandError as exc:
            self.stderr.write(error_line(exc, exc.returncode), style_func=lambda text: text)
            raise
        except Exception as exc:
            exit_code = exit_code_for(exc)
            if exit_code is None:
                raise
            self.stderr.write(error_line(exc, exit_code), style_func=lambda text: text)
            raise CommandError(str(exc), returncode=exit_code) from exc
