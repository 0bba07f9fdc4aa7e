import argparse
import json
from io import StringIO
from pathlib import Path

import pandas as pd
import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from apps.cli.management.commands.train import Command as TrainCommand
from apps.cli.services.command import (
    EXIT_DATA,
    EXIT_DIVERGED,
    EXIT_USAGE,
    architecture_arg,
    exit_code_for,
    format_versions,
)
from apps.core.services.run_config import UnknownConfigKey
from apps.forenet.models import Architecture
from apps.scada_ingest.services.records import MalformedHeader
from apps.training.models import TrainingRun, TrainingRunStatus
from apps.training.services.errors import DivergedLoss
from apps.training.services.run_service import TrainingRunService

SYNTH_SETTINGS = {
    "seed": 7,
    "n_failures": 4,
    "n_min": 120,
    "n_max": 160,
    "parameter_count": 6,
    "n_informative": 3,
    "window_length": 8,
    "horizon": 10,
}
RUN_SETTINGS = {
    "expected_parameters": 6,
    "window_length": 8,
    "horizon": 10,
    "epochs": 2,
    "batch_size": 16,
    "learning_rate": 0.01,
    "min_logs": 19,
}


def _write_json(path: Path, payload: dict[str, object]) -> Path:
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def _run(name: str, *args: str) -> str:
    stdout = StringIO()
    call_command(name, *args, stdout=stdout, stderr=StringIO())
    return stdout.getvalue()


@pytest.fixture
def run_config_path(tmp_path: Path) -> Path:
    return _write_json(tmp_path / "run.json", RUN_SETTINGS)


@pytest.fixture
def ingested_dir(tmp_path: Path, run_config_path: Path) -> Path:
    fixture_dir = tmp_path / "fixture"
    _run("synth", "--out", str(fixture_dir), "--config", str(_write_json(tmp_path / "synth.json", SYNTH_SETTINGS)))
    _run(
        "ingest",
        "--scada",
        str(fixture_dir / "scada.csv"),
        "--failures",
        str(fixture_dir / "failures.csv"),
        "--out",
        str(tmp_path / "data"),
        "--config",
        str(run_config_path),
        "--batch-label",
        "cli",
    )
    return tmp_path / "data"


def test_synth_writes_fixture_files(tmp_path: Path) -> None:
    output = _run(
        "synth",
        "--out",
        str(tmp_path / "fixture"),
        "--seed",
        "3",
        "--config",
        str(_write_json(tmp_path / "synth.json", SYNTH_SETTINGS)),
    )

    assert "Wrote 4 synthetic failures (seed=3, M=6)" in output
    assert len(pd.read_csv(tmp_path / "fixture" / "failures.csv")) == 4


@pytest.mark.django_db
def test_full_pipeline_from_synthetic_fleet_to_report(
    tmp_path: Path, ingested_dir: Path, run_config_path: Path
) -> None:
    validity = pd.read_csv(ingested_dir / "validity_report.csv")
    assert list(validity["valid"]) == ["yes", "yes", "yes", "yes"]

    train_output = _run(
        "train",
        "--data",
        str(ingested_dir),
        "--target",
        "2",
        "--model",
        "linear",
        "--out",
        str(tmp_path / "runs"),
        "--config",
        str(run_config_path),
    )
    run_dir = tmp_path / "runs" / "linear" / "failure_0002"
    assert "- epoch 2:" in train_output
    assert (run_dir / "last.fnet").is_file()
    assert TrainingRun.objects.get(target_tag=2).status == TrainingRunStatus.COMPLETED

    forecast_output = _run(
        "forecast",
        "--checkpoint",
        str(run_dir / "last.fnet"),
        "--data",
        str(ingested_dir),
        "--target",
        "2",
        "--no-svg",
    )
    trace_dir = ingested_dir / "traces" / "linear"
    assert "Forecast failure 2 with linear" in forecast_output
    meta = json.loads((trace_dir / "trace_2.json").read_text(encoding="utf-8"))
    assert meta["window_length"] == 8
    assert meta["horizon"] == 10
    assert meta["model"] == "linear"

    evaluate_output = _run("evaluate", "--traces", str(ingested_dir / "traces"))
    table = pd.read_csv(ingested_dir / "traces" / "dk_table.csv")
    assert list(table["failure_tag"]) == [2]
    assert "failure 2 [linear]" in evaluate_output

    report_dir = tmp_path / "report"
    _run(
        "report",
        "--results",
        str(ingested_dir / "traces"),
        "--out",
        str(report_dir),
        "--data",
        str(ingested_dir),
        "--no-svg",
    )
    assert (report_dir / "dk_table.csv").is_file()
    assert (report_dir / "linear" / "trace_2.csv").is_file()
    assert list(pd.read_csv(report_dir / "model_summary.csv")["model"]) == ["linear"]
    window = json.loads((report_dir / "maintenance_window.json").read_text(encoding="utf-8"))
    assert window["horizon_logs"] == 10
    correlation = pd.read_csv(report_dir / "correlation_1.csv")
    assert list(correlation.columns) == ["parameter", "p1", "p2", "p3", "p4", "p5", "p6"]


@pytest.mark.django_db
def test_train_all_targets_dispatches_one_task_per_failure(
    tmp_path: Path, ingested_dir: Path, run_config_path: Path
) -> None:
    output = _run(
        "train",
        "--data",
        str(ingested_dir),
        "--all-targets",
        "--model",
        "Linear",
        "--epochs",
        "1",
        "--out",
        str(tmp_path / "runs"),
        "--config",
        str(run_config_path),
    )

    assert "Trained 4 leave-one-out experiments for Linear." in output
    assert TrainingRun.objects.filter(status=TrainingRunStatus.COMPLETED).count() == 4
    for tag in range(1, 5):
        assert (tmp_path / "runs" / "linear" / f"failure_{tag:04d}" / "training_log.csv").is_file()


@pytest.mark.django_db
def test_train_requires_a_target(tmp_path: Path) -> None:
    with pytest.raises(CommandError) as excinfo:
        _run("train", "--data", str(tmp_path))

    assert excinfo.value.returncode == EXIT_USAGE


@pytest.mark.django_db
def test_train_rejects_target_together_with_all_targets(tmp_path: Path) -> None:
    with pytest.raises(CommandError) as excinfo:
        _run("train", "--data", str(tmp_path), "--target", "1", "--all-targets")

    assert excinfo.value.returncode == EXIT_USAGE


def test_missing_required_flag_is_a_usage_error(tmp_path: Path) -> None:
    with pytest.raises(CommandError) as excinfo:
        _run("ingest", "--scada", str(tmp_path / "scada.csv"))

    assert excinfo.value.returncode == EXIT_USAGE


def test_unknown_model_is_a_usage_error(tmp_path: Path) -> None:
    with pytest.raises(CommandError) as excinfo:
        _run("train", "--data", str(tmp_path), "--target", "1", "--model", "transformer")

    assert excinfo.value.returncode == EXIT_USAGE


def test_data_errors_exit_with_code_two_and_a_json_line(tmp_path: Path) -> None:
    (tmp_path / "scada.csv").write_text("timestamp,turbine,p1\n2017-01-01T00:00:00Z,T01,1.0\n", encoding="utf-8")
    (tmp_path / "failures.csv").write_text("turbine,timestamp,component,remarks\n", encoding="utf-8")
    stderr = StringIO()

    with pytest.raises(CommandError) as excinfo:
        call_command(
            "ingest",
            "--scada",
            str(tmp_path / "scada.csv"),
            "--failures",
            str(tmp_path / "failures.csv"),
            "--out",
            str(tmp_path / "data"),
            "-m",
            "2",
            stdout=StringIO(),
            stderr=stderr,
        )

    assert excinfo.value.returncode == EXIT_DATA
    payload = json.loads(stderr.getvalue().strip().splitlines()[-1])
    assert payload["error"] == "MalformedHeader"
    assert payload["exit_code"] == EXIT_DATA


def test_bad_config_documents_exit_with_code_one(tmp_path: Path) -> None:
    config_path = _write_json(tmp_path / "run.json", {"windows": 3})

    with pytest.raises(CommandError) as excinfo:
        _run("evaluate", "--traces", str(tmp_path), "--config", str(config_path))

    assert excinfo.value.returncode == EXIT_USAGE


@pytest.mark.django_db
def test_diverged_training_exits_with_code_three(
    tmp_path: Path, ingested_dir: Path, run_config_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    def diverge(self: TrainingRunService, run: TrainingRun) -> None:
        raise DivergedLoss("Training loss diverged in epoch 1.", epoch=1)

    monkeypatch.setattr(TrainingRunService, "execute", diverge)

    with pytest.raises(CommandError) as excinfo:
        _run(
            "train",
            "--data",
            str(ingested_dir),
            "--target",
            "1",
            "--model",
            "linear",
            "--config",
            str(run_config_path),
        )

    assert excinfo.value.returncode == EXIT_DIVERGED


def test_exit_code_mapping() -> None:
    assert exit_code_for(DivergedLoss("boom", epoch=2)) == EXIT_DIVERGED
    assert exit_code_for(UnknownConfigKey("bad key")) == EXIT_USAGE
    assert exit_code_for(MalformedHeader("bad header")) == EXIT_DATA
    assert exit_code_for(KeyError("other")) is None


@pytest.mark.parametrize(
    ("value", "expected"),
    [
        ("forenet2d", Architecture.FORENET_2D),
        ("ForeNet-2d", Architecture.FORENET_2D),
        ("forenet-3d", Architecture.FORENET_3D),
        ("cnn-lstm", Architecture.CNN_LSTM),
        ("LSTM_AM", Architecture.LSTM_AM),
    ],
)
def test_architecture_arg_accepts_aliases(value: str, expected: Architecture) -> None:
    assert architecture_arg(value) == expected


def test_architecture_arg_rejects_unknown_models() -> None:
    with pytest.raises(argparse.ArgumentTypeError, match="cnn-lstm"):
        architecture_arg("gru")


def test_version_names_every_on_disk_format() -> None:
    version = TrainCommand().get_version()

    assert version == format_versions()
    assert version.startswith("scada-rul-forecaster 0.1.0")
    assert "checkpoint format 1" in version
    assert "windowed dataset format" in version


def _last_error_line(stderr: StringIO) -> dict[str, object]:
    return json.loads(stderr.getvalue().strip().splitlines()[-1])


@pytest.mark.django_db
def test_missing_target_writes_a_json_error_line(tmp_path: Path) -> None:
    stderr = StringIO()

    with pytest.raises(CommandError):
        call_command("train", "--data", str(tmp_path), stdout=StringIO(), stderr=stderr)

    payload = _last_error_line(stderr)
    assert payload["error"] == "CommandError"
    assert payload["exit_code"] == EXIT_USAGE
    assert "--all-targets" in str(payload["message"])


@pytest.mark.django_db
def test_diverged_fan_out_writes_a_json_error_line(
    tmp_path: Path, ingested_dir: Path, run_config_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    def diverge(self: TrainingRunService, run: TrainingRun) -> None:
        raise DivergedLoss("Training loss diverged in epoch 2.", epoch=2)

    monkeypatch.setattr(TrainingRunService, "execute", diverge)
    stderr = StringIO()

    with pytest.raises(CommandError) as excinfo:
        call_command(
            "train",
            "--data",
            str(ingested_dir),
            "--all-targets",
            "--model",
            "linear",
            "--config",
            str(run_config_path),
            stdout=StringIO(),
            stderr=stderr,
        )

    assert excinfo.value.returncode == EXIT_DIVERGED
    assert _last_error_line(stderr) == {
        "error": "CommandError",
        "exit_code": EXIT_DIVERGED,
        "message": "At least one training run diverged.",
    }
