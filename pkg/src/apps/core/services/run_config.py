import json
from collections.abc import Mapping
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

from django.conf import settings


class RunConfigError(RuntimeError):
    """Raised when a run configuration document is unusable."""


class UnknownConfigKey(RunConfigError):
    """Raised when a config document names a key that is not a tunable."""


class InvalidConfigValue(RunConfigError):
    """Raised when a tunable has the wrong type or is out of range."""


# tunable -> settings attribute providing its default
SETTINGS_DEFAULTS: dict[str, str] = {
    "window_length": "RUL_WINDOW_LENGTH",
    "horizon": "RUL_FORECAST_HORIZON",
    "stride": "RUL_STRIDE",
    "min_log_margin": "RUL_MIN_LOG_MARGIN",
    "expected_parameters": "RUL_EXPECTED_PARAMETERS",
    "epochs": "RUL_EPOCHS",
    "batch_size": "RUL_BATCH_SIZE",
    "learning_rate": "RUL_LEARNING_RATE",
    "beta1": "RUL_ADAM_BETA1",
    "beta2": "RUL_ADAM_BETA2",
    "epsilon": "RUL_ADAM_EPSILON",
    "clip_norm": "RUL_CLIP_NORM",
    "seed": "RUL_SEED",
    "shuffle": "RUL_SHUFFLE",
    "selection": "RUL_SELECTION",
    "holdout_policy": "RUL_HOLDOUT_POLICY",
    "attention_scale": "RUL_ATTENTION_SCALE",
    "threshold": "RUL_CROSSING_THRESHOLD",
    "correlation_method": "RUL_CORRELATION_METHOD",
    "render_svg": "RUL_RENDER_SVG",
}

CHOICES: dict[str, frozenset[str]] = {
    "selection": frozenset({"dk", "rmse"}),
    "holdout_policy": frozenset({"target", "inner"}),
    "correlation_method": frozenset({"pearson", "spearman"}),
}

MINIMUMS: dict[str, float] = {
    "window_length": 1,
    "horizon": 0,
    "stride": 1,
    "min_log_margin": 0,
    "expected_parameters": 1,
    "epochs": 1,
    "batch_size": 1,
    "learning_rate": 0.0,
    "epsilon": 0.0,
    "clip_norm": 0.0,
}


@dataclass(frozen=True, slots=True)
class RunConfig:
    window_length: int
    horizon: int
    stride: int
    min_log_margin: int
    expected_parameters: int
    epochs: int
    batch_size: int
    learning_rate: float
    beta1: float
    beta2: float
    epsilon: float
    clip_norm: float
    seed: int
    shuffle: bool
    selection: str
    holdout_policy: str
    attention_scale: bool
    threshold: float
    correlation_method: str
    render_svg: bool
    min_logs: int | None = None

    @classmethod
    def defaults(cls) -> "RunConfig":
        values = {key: getattr(settings, attr) for key, attr in SETTINGS_DEFAULTS.items()}
        return cls.from_mapping(values)

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "RunConfig":
        known = {item.name for item in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise UnknownConfigKey(f"Unknown config keys: {', '.join(unknown)}")
        coerced = {key: _coerce(key, value) for key, value in values.items()}
        config = cls(**coerced)
        config.validate()
        return config

    @classmethod
    def load(
        cls,
        *,
        config_path: Path | None = None,
        overrides: Mapping[str, Any] | None = None,
    ) -> "RunConfig":
        merged: dict[str, Any] = cls.defaults().as_dict()
        if config_path is not None:
            merged.update(read_config_document(config_path))
        for key, value in (overrides or {}).items():
            if value is not None:
                merged[key] = value
        return cls.from_mapping(merged)

    def with_values(self, **changes: Any) -> "RunConfig":
        updated = replace(self, **{key: _coerce(key, value) for key, value in changes.items()})
        updated.validate()
        return updated

    def validate(self) -> None:
        for key, minimum in MINIMUMS.items():
            if getattr(self, key) < minimum:
                raise InvalidConfigValue(f"{key} must be >= {minimum}.")
        for key, allowed in CHOICES.items():
            if getattr(self, key) not in allowed:
                options = ", ".join(sorted(allowed))
                raise InvalidConfigValue(f"{key} must be one of: {options}.")
        if not 0.0 <= self.beta1 < 1.0 or not 0.0 <= self.beta2 < 1.0:
            raise InvalidConfigValue("beta1 and beta2 must lie in [0, 1).")
        if self.min_logs is not None and self.min_logs < 1:
            raise InvalidConfigValue("min_logs must be >= 1.")

    @property
    def resolved_min_logs(self) -> int:
        if self.min_logs is not None:
            return self.min_logs
        return self.window_length + self.horizon + self.min_log_margin

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


def read_config_document(path: Path) -> dict[str, Any]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise RunConfigError(f"Config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise RunConfigError(f"Config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise RunConfigError(f"Config file {path} must hold a flat JSON object.")
    return payload


def describe_defaults() -> str:
    defaults = RunConfig.defaults().as_dict()
    return ", ".join(f"{key}={defaults[key]}" for key in sorted(defaults))


_INT_KEYS = frozenset(
    {
        "window_length",
        "horizon",
        "stride",
        "min_log_margin",
        "expected_parameters",
        "epochs",
        "batch_size",
        "seed",
    }
)
_FLOAT_KEYS = frozenset(
    {"learning_rate", "beta1", "beta2", "epsilon", "clip_norm", "threshold"}
)
_BOOL_KEYS = frozenset({"shuffle", "attention_scale", "render_svg"})


def _coerce(key: str, value: Any) -> Any:
    try:
        if key == "min_logs":
            return None if value is None else _as_int(key, value)
        if key in _INT_KEYS:
            return _as_int(key, value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _BOOL_KEYS:
            return _as_bool(key, value)
    except (TypeError, ValueError) as exc:
        raise InvalidConfigValue(f"{key}: {exc}") from exc
    return str(value).lower()


def _as_int(key: str, value: Any) -> int:
    if isinstance(value, bool):
        raise InvalidConfigValue(f"{key} must be an integer, got a boolean.")
    if isinstance(value, float) and not value.is_integer():
        raise InvalidConfigValue(f"{key} must be an integer, got {value}.")
    return int(value)


def _as_bool(key: str, value: Any) -> bool:
    if isinstance(value, bool):
        return value
    normalized = str(value).strip().lower()
    if normalized in {"1", "true", "yes", "on"}:
        return True
    if normalized in {"0", "false", "no", "off"}:
        return False
    raise InvalidConfigValue(f"{key} must be a boolean, got {value!r}.")
