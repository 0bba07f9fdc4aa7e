import logging
from dataclasses import dataclass

import numpy as np

from apps.forenet.services.architectures import ModelSpec, layer_plan
from apps.forenet.services.layers import INPUT, Layer, Shape
from apps.tensor_core.services.errors import ShapeMismatch
from apps.tensor_core.services.tensor import LayerParams, Tensor

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class Model:
    spec: ModelSpec
    params: LayerParams
    layers: list[Layer]
    shapes: dict[str, Shape]

    @property
    def output_layer(self) -> str:
        return self.layers[-1].name

    def shape_trace(self) -> list[tuple[str, Shape]]:
        return [(layer.name, self.shapes[layer.name]) for layer in self.layers]

    def layer_param_counts(self) -> dict[str, int]:
        counts = {layer.name: 0 for layer in self.layers}
        for name, tensor in self.params:
            counts[name.split(".", 1)[0]] += tensor.size
        return counts

    def clone(self) -> "Model":
        copy = build(self.spec)
        copy.params.load_arrays(self.params.arrays())
        return copy


def build(spec: ModelSpec) -> Model:
    rng = np.random.default_rng(spec.seed)
    layers = layer_plan(spec.architecture)
    params = LayerParams()
    shapes: dict[str, Shape] = {INPUT: spec.input_shape}
    for layer in layers:
        input_shapes = [shapes[name] for name in layer.inputs]
        shapes[layer.name] = layer.output_shape(input_shapes)
        layer.declare(params, rng, input_shapes)
    shapes.pop(INPUT)
    model = Model(spec=spec, params=params, layers=layers, shapes=shapes)
    logger.debug(
        "Built forecasting model.",
        extra={"architecture": str(spec.architecture), "parameters": params.count()},
    )
    return model


def param_count(model: Model) -> int:
    return model.params.count()


def forward(model: Model, window: np.ndarray | Tensor) -> Tensor:
    source = window if isinstance(window, Tensor) else Tensor(window)
    if source.shape != model.spec.input_shape:
        raise ShapeMismatch(
            f"Window of shape {source.shape} does not match model input {model.spec.input_shape}."
        )
    outputs: dict[str, Tensor] = {INPUT: source}
    for layer in model.layers:
        outputs[layer.name] = layer.apply(
            model.params,
            [outputs[name] for name in layer.inputs],
            attention_scale=model.spec.attention_scale,
        )
    return outputs[model.output_layer]


def predict(model: Model, window: np.ndarray) -> float:
    return float(forward(model, np.asarray(window, dtype=np.float64)).data[0])


def predict_many(model: Model, windows: np.ndarray) -> np.ndarray:
    if len(windows) == 0:
        return np.zeros(0, dtype=np.float64)
    return np.fromiter((predict(model, window) for window in windows), dtype=np.float64, count=len(windows))
