import json
import logging
import struct
import zlib
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

import numpy as np

from apps.core.services.atomic_io import write_bytes_atomic
from apps.forenet.models import Architecture
from apps.forenet.services.architectures import ModelSpec
from apps.forenet.services.errors import (
    BadMagic,
    CheckpointError,
    ChecksumMismatch,
    VersionMismatch,
)
from apps.forenet.services.model import Model, build

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"FNET"
CHECKPOINT_FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sII")
_CHECKSUM = struct.Struct("<I")


def encode_checkpoint(model: Model, *, metadata: dict[str, Any] | None = None) -> bytes:
    header = {
        "architecture": str(model.spec.architecture),
        "input_shape": list(model.spec.input_shape),
        "seed": model.spec.seed,
        "attention_scale": model.spec.attention_scale,
        "parameter_count": model.params.count(),
        "manifest": model.params.manifest(),
        "created_at": datetime.now(UTC).isoformat(),
        "metadata": metadata or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = (
        _PREFIX.pack(CHECKPOINT_MAGIC, CHECKPOINT_FORMAT_VERSION, len(header_bytes))
        + header_bytes
        + model.params.flat().astype("<f8").tobytes()
    )
    return payload + _CHECKSUM.pack(zlib.crc32(payload) & 0xFFFFFFFF)


def decode_checkpoint(blob: bytes) -> tuple[Model, dict[str, Any]]:
    if len(blob) < len(CHECKPOINT_MAGIC) or blob[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise BadMagic("File is not a forecasting checkpoint.")
    if len(blob) < _PREFIX.size + _CHECKSUM.size:
        raise ChecksumMismatch("Checkpoint is truncated.")
    _, version, header_length = _PREFIX.unpack_from(blob)
    if version != CHECKPOINT_FORMAT_VERSION:
        raise VersionMismatch(
            f"Checkpoint format {version} is not supported (expected {CHECKPOINT_FORMAT_VERSION})."
        )

    payload, checksum_bytes = blob[: -_CHECKSUM.size], blob[-_CHECKSUM.size :]
    (stored,) = _CHECKSUM.unpack(checksum_bytes)
    if len(payload) < _PREFIX.size + header_length or zlib.crc32(payload) & 0xFFFFFFFF != stored:
        raise ChecksumMismatch("Checkpoint checksum does not match its contents.")

    header_end = _PREFIX.size + header_length
    try:
        header = json.loads(payload[_PREFIX.size : header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"Checkpoint header is unreadable: {exc}") from exc

    spec = ModelSpec(
        architecture=Architecture(header["architecture"]),
        input_shape=tuple(header["input_shape"]),
        seed=int(header["seed"]),
        attention_scale=bool(header.get("attention_scale", False)),
    )
    model = build(spec)
    if model.params.manifest() != header["manifest"]:
        raise CheckpointError("Checkpoint layer manifest does not match its architecture.")
    values = np.frombuffer(payload[header_end:], dtype="<f8")
    if values.size != model.params.count():
        raise ChecksumMismatch(
            f"Checkpoint holds {values.size} parameters, expected {model.params.count()}."
        )
    model.params.load_flat(values.astype(np.float64))
    return model, dict(header.get("metadata") or {})


def save_checkpoint(model: Model, path: Path, *, metadata: dict[str, Any] | None = None) -> Path:
    target = write_bytes_atomic(Path(path), encode_checkpoint(model, metadata=metadata))
    logger.info(
        "Saved model checkpoint.",
        extra={"path": str(target), "architecture": str(model.spec.architecture)},
    )
    return target


def load_checkpoint(path: Path) -> Model:
    return load_checkpoint_with_metadata(path)[0]


def load_checkpoint_with_metadata(path: Path) -> tuple[Model, dict[str, Any]]:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"Unable to read checkpoint {path}: {exc}") from exc
    return decode_checkpoint(blob)
