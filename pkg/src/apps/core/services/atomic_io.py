import json
import logging
import os
import tempfile
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import pandas as pd

logger = logging.getLogger(__name__)


class ReportIoError(RuntimeError):
    """Raised when an output artifact cannot be written."""


@contextmanager
def atomic_path(target: Path) -> Iterator[Path]:
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        handle, raw_tmp = tempfile.mkstemp(
            prefix=f".{target.name}.",
            suffix=".tmp",
            dir=target.parent,
        )
    except OSError as exc:
        raise ReportIoError(f"Unable to prepare output {target}: {exc}") from exc
    os.close(handle)
    tmp_path = Path(raw_tmp)
    try:
        yield tmp_path
        os.replace(tmp_path, target)
    except OSError as exc:
        tmp_path.unlink(missing_ok=True)
        raise ReportIoError(f"Unable to write output {target}: {exc}") from exc
    except BaseException:
        tmp_path.unlink(missing_ok=True)
        raise


def write_bytes_atomic(target: Path, payload: bytes) -> Path:
    with atomic_path(target) as tmp_path:
        tmp_path.write_bytes(payload)
    return target


def write_text_atomic(target: Path, text: str) -> Path:
    with atomic_path(target) as tmp_path:
        tmp_path.write_text(text, encoding="utf-8")
    return target


def write_json_atomic(target: Path, payload: dict[str, Any]) -> Path:
    return write_text_atomic(target, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_csv_atomic(target: Path, frame: pd.DataFrame) -> Path:
    with atomic_path(target) as tmp_path:
        frame.to_csv(tmp_path, index=False, lineterminator="\n", encoding="utf-8")
    logger.debug("Wrote CSV artifact.", extra={"path": str(target), "rows": len(frame)})
    return target
