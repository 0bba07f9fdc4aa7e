from dataclasses import dataclass

from apps.scada_ingest.services.records import LOG_INTERVAL

LOG_MINUTES = int(LOG_INTERVAL.total_seconds() // 60)
MINUTES_PER_HOUR = 60
MINUTES_PER_DAY = 24 * MINUTES_PER_HOUR


@dataclass(frozen=True, slots=True)
class DkResult:
    """Signed distance between the forecasted and the observed failure.

    Indices are 0-based log rows; negative ``dk_logs`` means the forecast came first.
    """

    forecast_index: int
    actual_index: int
    dk_logs: int
    dk_minutes: int

    @property
    def rendered(self) -> str:
        return render_dk(self.dk_minutes)

    @property
    def forecast_log_number(self) -> int:
        # log tallies are reported 1-based
        return self.forecast_index + 1

    @property
    def actual_log_number(self) -> int:
        return self.actual_index + 1


def compute_dk(forecast_index: int, actual_index: int) -> DkResult:
    dk_logs = int(forecast_index) - int(actual_index)
    return DkResult(
        forecast_index=int(forecast_index),
        actual_index=int(actual_index),
        dk_logs=dk_logs,
        dk_minutes=dk_logs * LOG_MINUTES,
    )


def _amount(value: float, unit: str) -> str:
    text = f"{value:.1f}".removesuffix(".0")
    return f"{text} {unit}" if text == "1" else f"{text} {unit}s"


def render_duration(minutes: int) -> str:
    magnitude = abs(int(minutes))
    if magnitude < MINUTES_PER_HOUR:
        return f"{magnitude} minute" if magnitude == 1 else f"{magnitude} minutes"
    if magnitude < MINUTES_PER_DAY:
        return _amount(magnitude / MINUTES_PER_HOUR, "hour")
    return _amount(magnitude / MINUTES_PER_DAY, "day")


def render_dk(dk_minutes: int) -> str:
    if dk_minutes == 0:
        return "0 minutes"
    direction = "behind" if dk_minutes < 0 else "past"
    return f"{render_duration(dk_minutes)} {direction} the actual failure"
