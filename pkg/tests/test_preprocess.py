from pathlib import Path

import numpy as np
import pytest

from apps.preprocess.services.errors import (
    EmptyDataset,
    HorizonTooLong,
    NonFiniteInput,
    NotEnoughLogs,
    ShapeMismatch,
)
from apps.preprocess.services.scaling import ScalingParams, minmax_apply, minmax_fit_transform
from apps.preprocess.services.store import (
    load_or_build_windowed,
    load_windowed_dataset,
    save_windowed_dataset,
    source_fingerprint,
    windowed_cache_dir,
)
from apps.preprocess.services.windowing import (
    apply_forecast_window,
    expand_depth,
    label_dataset,
    linear_degradation,
    slide_window,
    window_failure_dataset,
)
from apps.scada_ingest.models import FailureComponent
from apps.scada_ingest.services.records import FailureDataset


def _failure(n_logs: int, m: int = 3, *, tag: int = 1, seed: int = 0) -> FailureDataset:
    rng = np.random.default_rng(seed)
    return FailureDataset(
        failure_tag=tag,
        turbine_tag="T01",
        component=FailureComponent.GEARBOX,
        matrix=rng.normal(size=(n_logs, m)),
        timestamps=np.datetime64("2017-01-01T00:00") + np.arange(n_logs) * np.timedelta64(10, "m"),
        valid=True,
    )


def test_linear_degradation_counts_down_to_zero() -> None:
    np.testing.assert_array_equal(linear_degradation(5), [4, 3, 2, 1, 0])
    np.testing.assert_array_equal(linear_degradation(1), [0])
    labels = linear_degradation(31779)
    assert labels[0] == 31778
    assert labels[-1] == 0
    assert labels.shape == (31779,)
    assert np.all(np.diff(labels) == -1)


def test_linear_degradation_rejects_empty_dataset() -> None:
    with pytest.raises(EmptyDataset):
        linear_degradation(0)


def test_minmax_fit_transform_rescales_columns() -> None:
    scaled, params = minmax_fit_transform(np.array([[2.0, 7.0], [4.0, 7.0], [6.0, 7.0]]))

    np.testing.assert_array_equal(scaled[:, 0], [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(scaled[:, 1], [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(params.minimum, [2.0, 7.0])
    np.testing.assert_array_equal(params.maximum, [6.0, 7.0])


@pytest.mark.parametrize("seed", range(5))
def test_minmax_fit_transform_hits_both_ends_of_the_unit_interval(seed: int) -> None:
    matrix = np.random.default_rng(seed).normal(scale=10.0, size=(50, 3))

    scaled, _ = minmax_fit_transform(matrix)

    assert scaled.min() >= 0.0
    assert scaled.max() <= 1.0
    np.testing.assert_array_equal(scaled.min(axis=0), [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(scaled.max(axis=0), [1.0, 1.0, 1.0])
    for column in range(3):
        values = matrix[:, column]
        expected = (values - values.min()) / (values.max() - values.min())
        np.testing.assert_allclose(scaled[:, column], expected, rtol=0, atol=1e-15)


def test_minmax_fit_transform_rejects_non_finite_cells() -> None:
    matrix = np.ones((3, 2))
    matrix[1, 1] = np.nan

    with pytest.raises(NonFiniteInput, match="row 1, column 1"):
        minmax_fit_transform(matrix)


def test_minmax_apply_uses_frozen_params_and_clamps() -> None:
    params = ScalingParams(minimum=np.array([0.0]), maximum=np.array([10.0]))

    np.testing.assert_array_equal(minmax_apply(np.array([[5.0]]), params), [[0.5]])
    np.testing.assert_array_equal(minmax_apply(np.array([[30.0]]), params), [[2.0]])
    np.testing.assert_array_equal(minmax_apply(np.array([[-30.0]]), params), [[-1.0]])


def test_minmax_apply_matches_hand_computed_fixture() -> None:
    fixture_a = np.array([[0.0, 10.0], [2.0, 20.0], [4.0, 30.0], [8.0, 50.0]])
    fixture_b = np.array([[1.0, 15.0], [4.0, 40.0], [6.0, 10.0], [10.0, 60.0]])
    _, params = minmax_fit_transform(fixture_a)

    scaled = minmax_apply(fixture_b, params)

    expected = np.array([[0.125, 0.125], [0.5, 0.75], [0.75, 0.0], [1.25, 1.25]])
    np.testing.assert_allclose(scaled, expected, rtol=0, atol=1e-15)


def test_minmax_apply_rejects_column_mismatch() -> None:
    params = ScalingParams(minimum=np.zeros(2), maximum=np.ones(2))

    with pytest.raises(ShapeMismatch):
        minmax_apply(np.ones((3, 3)), params)


def test_slide_window_builds_windows_and_next_labels() -> None:
    scaled = np.random.default_rng(1).random((30, 4))
    labels = linear_degradation(30)

    pairs = slide_window(scaled, labels, 24)

    assert pairs.count == 6
    assert pairs.windows.shape == (6, 24, 4)
    np.testing.assert_array_equal(pairs.outputs, labels[24:30])
    np.testing.assert_array_equal(pairs.windows[5], scaled[5:29])


def test_slide_window_with_exact_length_is_empty() -> None:
    pairs = slide_window(np.zeros((24, 2)), linear_degradation(24), 24)

    assert pairs.count == 0


def test_slide_window_rejects_short_datasets() -> None:
    with pytest.raises(NotEnoughLogs):
        slide_window(np.zeros((10, 2)), linear_degradation(10), 24)


def test_window_size_is_length_times_width() -> None:
    pairs = slide_window(np.zeros((30, 82)), linear_degradation(30), 24)

    assert pairs.windows[0].size == 1968


def test_apply_forecast_window_shifts_targets_by_horizon() -> None:
    labels = linear_degradation(30)
    pairs = slide_window(np.random.default_rng(2).random((30, 2)), labels, 24)

    windowed = apply_forecast_window(pairs, 2)

    assert windowed.pair_count == 4
    np.testing.assert_array_equal(windowed.inputs[3], pairs.windows[3])
    assert windowed.targets[3] == pairs.outputs[5]
    assert windowed.log_indices[-1] == 29


def test_apply_forecast_window_with_zero_horizon_keeps_every_pair() -> None:
    labels = linear_degradation(30)
    pairs = slide_window(np.zeros((30, 2)), labels, 24)

    windowed = apply_forecast_window(pairs, 0)

    assert windowed.pair_count == pairs.count
    np.testing.assert_array_equal(windowed.targets, pairs.outputs)


def test_apply_forecast_window_rejects_horizon_past_the_data() -> None:
    pairs = slide_window(np.zeros((30, 2)), linear_degradation(30), 24)

    with pytest.raises(HorizonTooLong):
        apply_forecast_window(pairs, 6)


def test_two_week_horizon_at_ten_minute_logs() -> None:
    assert 14 * 24 * 6 == 2016


def test_windowing_matches_index_enumeration_oracle() -> None:
    rng = np.random.default_rng(3)
    for n_logs in range(1, 61):
        scaled = rng.random((n_logs, 2))
        labels = linear_degradation(n_logs)
        for window_length in range(1, min(10, n_logs) + 1):
            pairs = slide_window(scaled, labels, window_length)
            for horizon in range(0, 11):
                if n_logs < window_length + horizon:
                    continue
                starts = [
                    start
                    for start in range(n_logs)
                    if start + window_length + horizon <= n_logs - 1
                ]
                if not starts:
                    with pytest.raises(HorizonTooLong):
                        apply_forecast_window(pairs, horizon)
                    continue

                windowed = apply_forecast_window(pairs, horizon)

                expected_inputs = np.stack([scaled[start : start + window_length] for start in starts])
                expected_targets = np.array([labels[start + window_length + horizon] for start in starts])
                assert windowed.pair_count == n_logs - window_length - horizon
                np.testing.assert_array_equal(windowed.inputs, expected_inputs)
                np.testing.assert_array_equal(windowed.targets, expected_targets)
                assert windowed.targets[-1] == 0.0
                assert windowed.log_indices[-1] == n_logs - 1


def test_strided_windows_start_on_the_stride_grid() -> None:
    scaled = np.random.default_rng(4).random((40, 3))
    labels = linear_degradation(40)

    windowed = apply_forecast_window(slide_window(scaled, labels, 5, stride=3), 4)

    np.testing.assert_array_equal(windowed.starts, np.arange(0, 31, 3))
    for index, start in enumerate(windowed.starts):
        np.testing.assert_array_equal(windowed.inputs[index], scaled[start : start + 5])
        assert windowed.targets[index] == labels[start + 9]


def test_expand_depth_adds_a_unit_channel() -> None:
    window = np.random.default_rng(5).random((24, 82))

    expanded = expand_depth(window)

    assert expanded.shape == (24, 82, 1)
    np.testing.assert_array_equal(expanded.reshape(-1), window.reshape(-1))


def test_label_dataset_scales_labels_to_unit_range() -> None:
    labeled = label_dataset(np.random.default_rng(6).random((11, 2)))

    assert labeled.label_scale == 10.0
    assert labeled.labels[0] == 1.0
    assert labeled.labels[-1] == 0.0


def test_window_failure_dataset_round_trips_rows() -> None:
    failure = _failure(50, m=3)

    windowed = window_failure_dataset(failure, window_length=8, horizon=5)

    scaled, _ = minmax_fit_transform(failure.matrix)
    assert windowed.pair_count == 50 - 8 - 5
    for index in (0, 10, windowed.pair_count - 1):
        np.testing.assert_array_equal(windowed.inputs[index], scaled[index : index + 8])
    assert windowed.with_depth().input_shape == (8, 3, 1)
    assert windowed.meta["component"] == "gearbox"


def test_windowed_dataset_store_round_trip(tmp_path: Path) -> None:
    windowed = window_failure_dataset(_failure(60, m=4, tag=3), window_length=6, horizon=4, stride=2)

    save_windowed_dataset(windowed, tmp_path / "windows")
    loaded = load_windowed_dataset(tmp_path / "windows")

    np.testing.assert_array_equal(np.asarray(loaded.inputs), np.asarray(windowed.inputs))
    np.testing.assert_array_equal(loaded.targets, windowed.targets)
    np.testing.assert_array_equal(loaded.starts, windowed.starts)
    assert loaded.failure_tag == 3
    assert loaded.stride == 2
    assert loaded.label_scale == windowed.label_scale


def test_load_or_build_windowed_reuses_the_cache(tmp_path: Path) -> None:
    failure = _failure(40, m=3, tag=2)

    first = load_or_build_windowed(failure, cache_root=tmp_path, window_length=6, horizon=3)
    cache = windowed_cache_dir(tmp_path, window_length=6, horizon=3, stride=1) / "failure_0002"
    second = load_or_build_windowed(failure, cache_root=tmp_path, window_length=6, horizon=3)

    assert (cache / "meta.json").is_file()
    np.testing.assert_array_equal(np.asarray(first.inputs), np.asarray(second.inputs))


def test_load_or_build_windowed_rebuilds_when_source_changes(tmp_path: Path) -> None:
    original = _failure(40, m=3, tag=2, seed=0)
    corrected = _failure(40, m=3, tag=2, seed=1)
    load_or_build_windowed(original, cache_root=tmp_path, window_length=6, horizon=3)

    reloaded = load_or_build_windowed(corrected, cache_root=tmp_path, window_length=6, horizon=3)

    expected = window_failure_dataset(corrected, window_length=6, horizon=3, stride=1)
    np.testing.assert_array_equal(np.asarray(reloaded.inputs), np.asarray(expected.inputs))
    assert source_fingerprint(original) != source_fingerprint(corrected)


def test_load_or_build_windowed_rebuilds_caches_without_fingerprint(tmp_path: Path) -> None:
    stale = _failure(40, m=3, tag=2, seed=0)
    fresh = _failure(40, m=3, tag=2, seed=5)
    cache = windowed_cache_dir(tmp_path, window_length=6, horizon=3, stride=1) / "failure_0002"
    save_windowed_dataset(window_failure_dataset(stale, window_length=6, horizon=3, stride=1), cache)

    loaded = load_or_build_windowed(fresh, cache_root=tmp_path, window_length=6, horizon=3)

    expected = window_failure_dataset(fresh, window_length=6, horizon=3, stride=1)
    np.testing.assert_array_equal(np.asarray(loaded.inputs), np.asarray(expected.inputs))
