import json
import logging
import shutil
import zlib
from pathlib import Path
from typing import Any

import numpy as np

from apps.core.services.atomic_io import atomic_path, write_bytes_atomic, write_json_atomic
from apps.preprocess.services.errors import PreprocessError
from apps.preprocess.services.scaling import ScalingParams
from apps.preprocess.services.windowing import WindowedDataset, window_failure_dataset
from apps.scada_ingest.services.dataset_store import failure_dir_name
from apps.scada_ingest.services.records import FailureDataset

logger = logging.getLogger(__name__)

WINDOWED_FORMAT_VERSION = 1
WINDOWED_CACHE_PREFIX = "windows_"
_WRITE_CHUNK = 2048


def windowed_cache_dir(root: Path, *, window_length: int, horizon: int, stride: int) -> Path:
    return Path(root) / f"{WINDOWED_CACHE_PREFIX}l{window_length}_f{horizon}_s{stride}"


def source_fingerprint(failure: FailureDataset) -> str:
    checksum = zlib.crc32(np.ascontiguousarray(failure.matrix, dtype="<f8").tobytes())
    checksum = zlib.crc32(failure.timestamps.astype("datetime64[ns]").view("<i8").tobytes(), checksum)
    return f"{failure.n_logs}x{failure.parameter_count}:{checksum:08x}"


def save_windowed_dataset(dataset: WindowedDataset, directory: Path, *, fingerprint: str = "") -> Path:
    directory = Path(directory)
    with atomic_path(directory / "windows.bin") as tmp_path, tmp_path.open("wb") as handle:
        for offset in range(0, dataset.pair_count, _WRITE_CHUNK):
            chunk = dataset.inputs[offset : offset + _WRITE_CHUNK]
            np.ascontiguousarray(chunk, dtype="<f8").tofile(handle)
    write_bytes_atomic(directory / "targets.bin", dataset.targets.astype("<f8").tobytes())

    meta: dict[str, Any] = {
        "format_version": WINDOWED_FORMAT_VERSION,
        "failure_tag": dataset.failure_tag,
        "n_logs": dataset.n_logs,
        "parameter_count": dataset.parameter_count,
        "window_length": dataset.window_length,
        "horizon": dataset.horizon,
        "stride": dataset.stride,
        "pair_count": dataset.pair_count,
        "label_scale": dataset.label_scale,
        "depth_expanded": dataset.depth_expanded,
        "scaling": dataset.scaling.to_payload() if dataset.scaling is not None else None,
        "meta": dataset.meta,
        "source_fingerprint": fingerprint,
    }
    write_json_atomic(directory / "meta.json", meta)
    return directory


def load_windowed_dataset(directory: Path) -> WindowedDataset:
    directory = Path(directory)
    try:
        meta = json.loads((directory / "meta.json").read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise PreprocessError(f"Unable to read windowed dataset at {directory}: {exc}") from exc
    if int(meta.get("format_version", 0)) != WINDOWED_FORMAT_VERSION:
        raise PreprocessError(f"Unsupported windowed dataset format at {directory}.")

    pair_count = int(meta["pair_count"])
    window_length = int(meta["window_length"])
    parameter_count = int(meta["parameter_count"])
    shape: tuple[int, ...] = (pair_count, window_length, parameter_count)
    try:
        inputs = np.memmap(directory / "windows.bin", dtype="<f8", mode="r", shape=shape)
        targets = np.fromfile(directory / "targets.bin", dtype="<f8")
    except (OSError, ValueError) as exc:
        raise PreprocessError(f"Windowed dataset at {directory} is unreadable: {exc}") from exc
    if targets.shape[0] != pair_count:
        raise PreprocessError(f"Windowed dataset at {directory} is truncated.")

    stride = int(meta["stride"])
    scaling = meta.get("scaling")
    dataset = WindowedDataset(
        failure_tag=int(meta["failure_tag"]),
        inputs=inputs,
        targets=targets.astype(np.float64),
        starts=np.arange(pair_count, dtype=np.int64) * stride,
        window_length=window_length,
        horizon=int(meta["horizon"]),
        stride=stride,
        n_logs=int(meta["n_logs"]),
        label_scale=float(meta["label_scale"]),
        scaling=ScalingParams.from_payload(scaling) if scaling else None,
        meta=dict(meta.get("meta") or {}),
    )
    return dataset.with_depth() if meta.get("depth_expanded") else dataset


def load_or_build_windowed(
    failure: FailureDataset,
    *,
    cache_root: Path | None,
    window_length: int,
    horizon: int,
    stride: int = 1,
) -> WindowedDataset:
    if cache_root is None:
        return window_failure_dataset(
            failure, window_length=window_length, horizon=horizon, stride=stride
        )
    directory = windowed_cache_dir(
        cache_root, window_length=window_length, horizon=horizon, stride=stride
    ) / failure_dir_name(failure.failure_tag)
    fingerprint = source_fingerprint(failure)
    if _cached_fingerprint(directory) == fingerprint:
        logger.debug("Reusing cached windows.", extra={"failure_tag": failure.failure_tag})
        return load_windowed_dataset(directory)
    built = window_failure_dataset(failure, window_length=window_length, horizon=horizon, stride=stride)
    save_windowed_dataset(built, directory, fingerprint=fingerprint)
    return load_windowed_dataset(directory)


def _cached_fingerprint(directory: Path) -> str | None:
    try:
        meta = json.loads((directory / "meta.json").read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return None
    return meta.get("source_fingerprint") or None


def clear_windowed_caches(root: Path) -> list[Path]:
    removed = [path for path in Path(root).glob(f"{WINDOWED_CACHE_PREFIX}*") if path.is_dir()]
    for path in removed:
        shutil.rmtree(path)
    if removed:
        logger.info("Cleared windowed caches.", extra={"root": str(root), "caches": len(removed)})
    return removed
