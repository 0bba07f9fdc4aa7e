import logging
from pathlib import Path

from apps.evaluation.services.dk import compute_dk
from apps.evaluation.services.errors import EvaluationError
from apps.evaluation.services.forecasting import detect_crossing
from apps.evaluation.services.reports import ExperimentResult, read_trace_files

logger = logging.getLogger(__name__)

TRACE_GLOB = "trace_*.csv"


def find_trace_files(root: Path) -> list[Path]:
    root = Path(root)
    if not root.is_dir():
        raise EvaluationError(f"Trace directory {root} does not exist.")
    return sorted(root.rglob(TRACE_GLOB))


def collect_results(root: Path, *, threshold: float = 0.0) -> list[ExperimentResult]:
    paths = find_trace_files(root)
    if not paths:
        raise EvaluationError(f"No forecast traces found under {root}.")

    results: dict[tuple[str, int], ExperimentResult] = {}
    for path in paths:
        trace, meta = read_trace_files(path)
        model = str(meta.get("model") or path.parent.name)
        crossing = detect_crossing(trace, threshold)
        dk = compute_dk(crossing, trace.actual_failure_index) if isinstance(crossing, int) else None
        key = (model, trace.failure_tag)
        if key in results:
            raise EvaluationError(
                f"Found more than one trace for failure {trace.failure_tag} and model {model}."
            )
        results[key] = ExperimentResult(
            failure_tag=trace.failure_tag,
            model=model,
            data_logs_available=int(meta.get("data_logs_available", trace.actual_failure_index + 1)),
            component=str(meta.get("component", "")),
            dk=dk,
            trace=trace,
        )
    logger.info("Collected forecast traces.", extra={"root": str(root), "traces": len(results)})
    return [results[key] for key in sorted(results, key=lambda item: (item[1], item[0]))]
