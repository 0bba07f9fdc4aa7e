from pathlib import Path

import matplotlib

matplotlib.use("Agg")

from matplotlib.figure import Figure  # noqa: E402

from apps.core.services.atomic_io import atomic_path  # noqa: E402
from apps.evaluation.services.forecasting import ForecastTrace  # noqa: E402

SVG_HASH_SALT = "scada-rul-trace"


def render_trace_svg(trace: ForecastTrace, target: Path, *, title: str = "") -> Path:
    figure = Figure(figsize=(8, 4))
    axis = figure.add_subplot(1, 1, 1)
    axis.plot(trace.log_indices + 1, trace.targets, label="Target RUL", linewidth=1.2)
    axis.plot(trace.log_indices + 1, trace.predictions, label="Predicted RUL", linewidth=1.0)
    axis.axvline(trace.actual_failure_index + 1, color="grey", linestyle="--", linewidth=0.8)
    axis.axhline(0.0, color="black", linewidth=0.5)
    axis.set_xlabel("Turbine life (SCADA log)")
    axis.set_ylabel("Scaled remaining useful life")
    axis.set_title(title or f"Failure {trace.failure_tag}")
    axis.legend(loc="upper right")
    figure.tight_layout()

    target = Path(target)
    # fixed id salt and no date keep repeated renders byte-identical
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}), atomic_path(target) as tmp_path:
        figure.savefig(tmp_path, format="svg", metadata={"Date": None})
    return target
