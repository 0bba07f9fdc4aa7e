from collections.abc import Sequence

import numpy as np
import pandas as pd

from apps.evaluation.services.errors import EvaluationError
from apps.preprocess.services.errors import NotEnoughLogs

CORRELATION_METHODS = ("pearson", "spearman")


def correlation_matrix(matrix: np.ndarray, method: str = "pearson") -> np.ndarray:
    """Symmetric M x M correlation with a unit diagonal; constant columns correlate 0."""
    if method not in CORRELATION_METHODS:
        raise EvaluationError(f"Unsupported correlation method {method!r}.")
    values = np.asarray(matrix, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] < 2:
        raise NotEnoughLogs("Correlation needs at least two logs.")

    corr = pd.DataFrame(values).corr(method=method).to_numpy(dtype=np.float64, copy=True)
    corr = np.nan_to_num(corr, nan=0.0)
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def correlation_frame(
    matrix: np.ndarray,
    columns: Sequence[str] = (),
    method: str = "pearson",
) -> pd.DataFrame:
    corr = correlation_matrix(matrix, method)
    labels = list(columns) if len(columns) == corr.shape[0] else [f"p{index + 1}" for index in range(corr.shape[0])]
    frame = pd.DataFrame(corr, columns=labels)
    frame.insert(0, "parameter", labels)
    return frame
