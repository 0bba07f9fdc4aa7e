from dataclasses import dataclass

import numpy as np

from apps.forenet.services.errors import UnsupportedShape
from apps.tensor_core.services import init, ops
from apps.tensor_core.services.tensor import LayerParams, Tensor

Shape = tuple[int, ...]

INPUT = "input"


@dataclass(frozen=True, slots=True)
class Layer:
    name: str
    inputs: tuple[str, ...]

    def output_shape(self, input_shapes: list[Shape]) -> Shape:
        raise NotImplementedError

    def declare(self, params: LayerParams, rng: np.random.Generator, input_shapes: list[Shape]) -> None:
        raise NotImplementedError

    def apply(self, params: LayerParams, inputs: list[Tensor], *, attention_scale: bool = False) -> Tensor:
        raise NotImplementedError

    def _single(self, input_shapes: list[Shape], rank: int) -> Shape:
        (shape,) = input_shapes
        if len(shape) != rank:
            raise UnsupportedShape(f"Layer {self.name} expects a rank-{rank} input, got {shape}.")
        return shape


@dataclass(frozen=True, slots=True)
class Conv1DLayer(Layer):
    filters: int
    kernel_size: int
    activation: str = "relu"

    def output_shape(self, input_shapes: list[Shape]) -> Shape:
        length, _ = self._single(input_shapes, 2)
        if length < self.kernel_size:
            raise UnsupportedShape(f"Layer {self.name} needs at least {self.kernel_size} steps, got {length}.")
        return (length - self.kernel_size + 1, self.filters)

    def declare(self, params: LayerParams, rng: np.random.Generator, input_shapes: list[Shape]) -> None:
        _, channels = self._single(input_shapes, 2)
        params.add(f"{self.name}.kernel", init.conv_kernel(rng, (self.kernel_size, channels, self.filters)))
        params.add(f"{self.name}.bias", np.zeros(self.filters))

    def apply(self, params: LayerParams, inputs: list[Tensor], *, attention_scale: bool = False) -> Tensor:
        return ops.conv1d(
            inputs[0],
            params[f"{self.name}.kernel"],
            params[f"{self.name}.bias"],
            activation=self.activation,
        )


@dataclass(frozen=True, slots=True)
class Conv2DLayer(Layer):
    filters: int
    kernel_size: int
    activation: str = "relu"

    def output_shape(self, input_shapes: list[Shape]) -> Shape:
        height, width, _ = self._single(input_shapes, 3)
        if height < self.kernel_size or width < self.kernel_size:
            raise UnsupportedShape(
                f"Layer {self.name} needs at least {self.kernel_size}x{self.kernel_size} cells, "
                f"got {height}x{width}."
            )
        return (height - self.kernel_size + 1, width - self.kernel_size + 1, self.filters)

    def declare(self, params: LayerParams, rng: np.random.Generator, input_shapes: list[Shape]) -> None:
        _, _, channels = self._single(input_shapes, 3)
        shape = (self.kernel_size, self.kernel_size, channels, self.filters)
        params.add(f"{self.name}.kernel", init.conv_kernel(rng, shape))
        params.add(f"{self.name}.bias", np.zeros(self.filters))

    def apply(self, params: LayerParams, inputs: list[Tensor], *, attention_scale: bool = False) -> Tensor:
        return ops.conv2d(
            inputs[0],
            params[f"{self.name}.kernel"],
            params[f"{self.name}.bias"],
            activation=self.activation,
        )


@dataclass(frozen=True, slots=True)
class LstmLayer(Layer):
    units: int

    def output_shape(self, input_shapes: list[Shape]) -> Shape:
        steps, _ = self._single(input_shapes, 2)
        return (steps, self.units)

    def declare(self, params: LayerParams, rng: np.random.Generator, input_shapes: list[Shape]) -> None:
        _, features = self._single(input_shapes, 2)
        kernel, recurrent, bias = init.lstm_kernels(rng, features, self.units)
        params.add(f"{self.name}.kernel", kernel)
        params.add(f"{self.name}.recurrent_kernel", recurrent)
        params.add(f"{self.name}.bias", bias)

    def apply(self, params: LayerParams, inputs: list[Tensor], *, attention_scale: bool = False) -> Tensor:
        return ops.lstm(
            inputs[0],
            params[f"{self.name}.kernel"],
            params[f"{self.name}.recurrent_kernel"],
            params[f"{self.name}.bias"],
        )


@dataclass(frozen=True, slots=True)
class AttentionLayer(Layer):
    def output_shape(self, input_shapes: list[Shape]) -> Shape:
        return self._single(input_shapes, 2)

    def apply(self, params: LayerParams, inputs: list[Tensor], *, attention_scale: bool = False) -> Tensor:
        return ops.dot_attention(inputs[0], scaled=attention_scale)


@dataclass(frozen=True, slots=True)
class SpatialSoftmaxLayer(Layer):
    def output_shape(self, input_shapes: list[Shape]) -> Shape:
        shape = self._single(input_shapes, 3)
        if shape[2] != 1:
            raise UnsupportedShape(f"Layer {self.name} expects a single-channel map, got {shape}.")
        return shape

    def apply(self, params: LayerParams, inputs: list[Tensor], *, attention_scale: bool = False) -> Tensor:
        return ops.spatial_softmax(inputs[0])


@dataclass(frozen=True, slots=True)
class IdentityLayer(Layer):
    def output_shape(self, input_shapes: list[Shape]) -> Shape:
        (shape,) = input_shapes
        return shape

    def apply(self, params: LayerParams, inputs: list[Tensor], *, attention_scale: bool = False) -> Tensor:
        return inputs[0]


@dataclass(frozen=True, slots=True)
class MultiplyLayer(Layer):
    def output_shape(self, input_shapes: list[Shape]) -> Shape:
        features, weights = input_shapes
        if len(features) != 3 or weights != (*features[:2], 1):
            raise UnsupportedShape(f"Layer {self.name} cannot multiply {features} by {weights}.")
        return features

    def apply(self, params: LayerParams, inputs: list[Tensor], *, attention_scale: bool = False) -> Tensor:
        return ops.broadcast_multiply(inputs[0], inputs[1])


@dataclass(frozen=True, slots=True)
class FlattenLayer(Layer):
    def output_shape(self, input_shapes: list[Shape]) -> Shape:
        (shape,) = input_shapes
        return (int(np.prod(shape)),)

    def apply(self, params: LayerParams, inputs: list[Tensor], *, attention_scale: bool = False) -> Tensor:
        return ops.flatten(inputs[0])


@dataclass(frozen=True, slots=True)
class DenseLayer(Layer):
    units: int = 1

    def output_shape(self, input_shapes: list[Shape]) -> Shape:
        self._single(input_shapes, 1)
        return (self.units,)

    def declare(self, params: LayerParams, rng: np.random.Generator, input_shapes: list[Shape]) -> None:
        (features,) = self._single(input_shapes, 1)
        params.add(f"{self.name}.kernel", init.dense_kernel(rng, features, self.units))
        params.add(f"{self.name}.bias", np.zeros(self.units))

    def apply(self, params: LayerParams, inputs: list[Tensor], *, attention_scale: bool = False) -> Tensor:
        return ops.dense(inputs[0], params[f"{self.name}.kernel"], params[f"{self.name}.bias"])
