from datetime import datetime, timedelta
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from apps.scada_ingest.models import FailureComponent, FailureRecord
from apps.scada_ingest.services.dataset_store import (
    load_failure_dataset,
    load_failure_datasets,
    save_failure_dataset,
)
from apps.scada_ingest.services.ingest_service import ScadaIngestService
from apps.scada_ingest.services.parser import component_from_text, parse_failures, parse_scada
from apps.scada_ingest.services.records import (
    EmptyFile,
    MalformedHeader,
    MalformedTimestamp,
    NonMonotonicTimestamps,
)
from apps.scada_ingest.services.splitter import build_failure_datasets

START = datetime(2017, 1, 1)
STEP = timedelta(minutes=10)


def _stamp(index: int) -> str:
    return (START + index * STEP).strftime("%Y-%m-%dT%H:%M:%SZ")


def _write(path: Path, lines: list[str]) -> Path:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _scada_file(path: Path, rows_by_turbine: dict[str, int], m: int = 2) -> Path:
    header = ",".join(["timestamp", "turbine", *[f"p{index + 1}" for index in range(m)]])
    lines = [header]
    for turbine, count in rows_by_turbine.items():
        for row in range(count):
            values = ",".join(f"{row + column * 0.5:.1f}" for column in range(m))
            lines.append(f"{_stamp(row)},{turbine},{values}")
    return _write(path, lines)


def _failures_file(path: Path, rows: list[tuple[str, int, str]]) -> Path:
    lines = ["turbine,timestamp,component,remarks"]
    lines.extend(f"{turbine},{_stamp(index)},{component},note" for turbine, index, component in rows)
    return _write(path, lines)


def test_parse_scada_reads_well_formed_rows(tmp_path: Path) -> None:
    path = _write(
        tmp_path / "scada.csv",
        [
            "timestamp,turbine,p1,p2",
            f"{_stamp(0)},T01,1.0,2.0",
            f"{_stamp(1)},T01,1.5,2.5",
            f"{_stamp(2)},T01,2.0,3.0",
        ],
    )

    table = parse_scada(path, expected_m=2)

    assert len(table) == 3
    assert table.dropped_count == 0
    assert table[1].values == (1.5, 2.5)
    assert table[0].turbine_tag == "T01"


def test_parse_scada_drops_rows_with_blank_cells(tmp_path: Path) -> None:
    path = _write(
        tmp_path / "scada.csv",
        [
            "timestamp,turbine,p1,p2",
            f"{_stamp(0)},T01,1.0,2.0",
            f"{_stamp(1)},T01,1.5,",
            f"{_stamp(2)},T01,2.0,3.0",
        ],
    )

    table = parse_scada(path, expected_m=2)

    assert len(table) == 2
    assert table.dropped_count == 1


def test_parse_scada_keeps_all_parameter_columns(tmp_path: Path) -> None:
    path = _scada_file(tmp_path / "scada.csv", {"T01": 3}, m=82)

    table = parse_scada(path, expected_m=82)

    assert len(table[0].values) == 82


def test_parse_scada_rejects_wrong_column_count(tmp_path: Path) -> None:
    path = _scada_file(tmp_path / "scada.csv", {"T01": 3}, m=2)

    with pytest.raises(MalformedHeader):
        parse_scada(path, expected_m=3)


def test_parse_scada_rejects_empty_file(tmp_path: Path) -> None:
    path = _write(tmp_path / "scada.csv", [""])

    with pytest.raises(EmptyFile):
        parse_scada(path, expected_m=2)


def test_parse_scada_rejects_repeated_timestamps(tmp_path: Path) -> None:
    path = _write(
        tmp_path / "scada.csv",
        [
            "timestamp,turbine,p1,p2",
            f"{_stamp(0)},T01,1.0,2.0",
            f"{_stamp(0)},T01,1.5,2.5",
        ],
    )

    with pytest.raises(NonMonotonicTimestamps):
        parse_scada(path, expected_m=2)


def test_parse_failures_tags_events_in_turbine_time_order(tmp_path: Path) -> None:
    rows = [
        (turbine, index * 10 + 5, "Gearbox")
        for index in range(3)
        for turbine in ("T11", "T01", "T07", "T06")
    ]
    path = _failures_file(tmp_path / "failures.csv", rows)

    events = parse_failures(path)

    assert [event.failure_tag for event in events] == list(range(1, 13))
    assert [event.turbine_tag for event in events[:3]] == ["T01", "T01", "T01"]
    assert events[0].timestamp < events[1].timestamp


def test_parse_failures_empty_file_yields_no_events(tmp_path: Path) -> None:
    path = _write(tmp_path / "failures.csv", [""])

    assert parse_failures(path) == []


def test_parse_failures_reports_bad_timestamp_row(tmp_path: Path) -> None:
    path = _write(
        tmp_path / "failures.csv",
        ["turbine,timestamp,component,remarks", "T01,not-a-time,Gearbox,x"],
    )

    with pytest.raises(MalformedTimestamp, match="row 1"):
        parse_failures(path)


def test_component_vocabulary_maps_free_text() -> None:
    assert component_from_text("Hydraulic group") == (FailureComponent.HYDRAULIC_GROUP, "")
    assert component_from_text("GENERATOR_BEARING") == (FailureComponent.GENERATOR_BEARING, "")
    assert component_from_text("Pitch system") == (FailureComponent.OTHER, "Pitch system")


def test_split_short_life_is_marked_invalid(tmp_path: Path) -> None:
    records = parse_scada(_scada_file(tmp_path / "scada.csv", {"T06": 196}), expected_m=2)
    events = parse_failures(_failures_file(tmp_path / "failures.csv", [("T06", 195, "Generator")]))

    split = build_failure_datasets(records, events, min_logs=2100)

    assert len(split.datasets) == 1
    assert split.datasets[0].n_logs == 196
    assert split.datasets[0].valid is False


def test_split_two_failures_partition_the_stream(tmp_path: Path) -> None:
    records = parse_scada(_scada_file(tmp_path / "scada.csv", {"T01": 250}), expected_m=2)
    events = parse_failures(
        _failures_file(tmp_path / "failures.csv", [("T01", 99, "Gearbox"), ("T01", 249, "Transformer")])
    )

    split = build_failure_datasets(records, events, min_logs=10)

    assert [dataset.n_logs for dataset in split.datasets] == [100, 150]
    first, second = split.datasets
    assert first.timestamps[-1] < second.timestamps[0]
    stacked = np.vstack([first.matrix, second.matrix])
    np.testing.assert_array_equal(stacked, records.values)
    assert first.component == FailureComponent.GEARBOX
    assert second.component == FailureComponent.TRANSFORMER


def test_split_reports_event_without_turbine_records(tmp_path: Path) -> None:
    records = parse_scada(_scada_file(tmp_path / "scada.csv", {"T01": 20}), expected_m=2)
    events = parse_failures(_failures_file(tmp_path / "failures.csv", [("T99", 10, "Gearbox")]))

    split = build_failure_datasets(records, events, min_logs=5)

    assert split.datasets == []
    assert len(split.issues) == 1
    assert split.issues[0].reason == "no_records_for_turbine"


def test_failure_dataset_round_trips_through_store(tmp_path: Path) -> None:
    records = parse_scada(_scada_file(tmp_path / "scada.csv", {"T01": 40}), expected_m=2)
    events = parse_failures(_failures_file(tmp_path / "failures.csv", [("T01", 39, "Gearbox")]))
    (dataset,) = build_failure_datasets(records, events, min_logs=10).datasets

    directory = save_failure_dataset(dataset, tmp_path / "data")
    loaded = load_failure_dataset(directory)

    assert directory.name == "failure_0001"
    np.testing.assert_array_equal(loaded.matrix, dataset.matrix)
    np.testing.assert_array_equal(loaded.timestamps, dataset.timestamps)
    assert loaded.component == dataset.component
    assert loaded.valid is True


@pytest.mark.django_db
def test_ingest_service_writes_datasets_reports_and_catalog(tmp_path: Path) -> None:
    scada = _scada_file(tmp_path / "scada.csv", {"T01": 60, "T06": 30})
    failures = _failures_file(
        tmp_path / "failures.csv",
        [("T01", 59, "Gearbox"), ("T06", 29, "Hydraulic group"), ("T99", 5, "Generator")],
    )
    out_dir = tmp_path / "data"

    outcome = ScadaIngestService().ingest(
        scada_path=scada,
        failures_path=failures,
        out_dir=out_dir,
        expected_m=2,
        min_logs=40,
        batch_label="unit",
    )

    assert [dataset.failure_tag for dataset in load_failure_datasets(out_dir)] == [1, 2]
    assert [dataset.failure_tag for dataset in load_failure_datasets(out_dir, valid_only=True)] == [1]
    validity = pd.read_csv(out_dir / "validity_report.csv")
    assert list(validity["failure_tag"]) == [1, 2, 3]
    assert list(validity["valid"]) == ["yes", "no", "no"]
    tally = pd.read_csv(out_dir / "turbine_tally.csv")
    assert dict(zip(tally["turbine_tag"], tally["failures"], strict=True)) == {"T01": 1, "T06": 1, "T99": 1}
    assert outcome.event_count == 3
    assert FailureRecord.objects.filter(ingest_batch="unit").count() == 2
    assert FailureRecord.objects.get(ingest_batch="unit", failure_tag=2).component == "hydraulic_group"


@pytest.mark.django_db
def test_ingest_service_replaces_catalog_for_repeated_batch(tmp_path: Path) -> None:
    scada = _scada_file(tmp_path / "scada.csv", {"T01": 60})
    failures = _failures_file(tmp_path / "failures.csv", [("T01", 59, "Gearbox")])
    service = ScadaIngestService()

    for _ in range(2):
        service.ingest(
            scada_path=scada,
            failures_path=failures,
            out_dir=tmp_path / "data",
            expected_m=2,
            min_logs=10,
            batch_label="repeat",
        )

    assert FailureRecord.objects.filter(ingest_batch="repeat").count() == 1


@pytest.mark.django_db
def test_ingest_catalog_keeps_long_default_batch_labels(tmp_path: Path) -> None:
    scada = _scada_file(tmp_path / "scada.csv", {"T01": 60})
    failures = _failures_file(tmp_path / "failures.csv", [("T01", 59, "Gearbox")])
    out_dir = tmp_path / ("deep_" * 20) / "ingested"

    ScadaIngestService().ingest(
        scada_path=scada,
        failures_path=failures,
        out_dir=out_dir,
        expected_m=2,
        min_logs=10,
    )

    record = FailureRecord.objects.get()
    assert len(record.ingest_batch) > 128
    assert record.ingest_batch == str(out_dir.resolve())


@pytest.mark.django_db
def test_reingest_clears_windowed_caches(tmp_path: Path) -> None:
    scada = _scada_file(tmp_path / "scada.csv", {"T01": 60})
    failures = _failures_file(tmp_path / "failures.csv", [("T01", 59, "Gearbox")])
    stale = tmp_path / "data" / "windows_l8_f10_s1" / "failure_0001"
    stale.mkdir(parents=True)
    (stale / "meta.json").write_text("{}", encoding="utf-8")
    keep = tmp_path / "data" / "runs"
    keep.mkdir()

    ScadaIngestService().ingest(
        scada_path=scada,
        failures_path=failures,
        out_dir=tmp_path / "data",
        expected_m=2,
        min_logs=10,
        batch_label="cache",
    )

    assert not (tmp_path / "data" / "windows_l8_f10_s1").exists()
    assert keep.is_dir()
