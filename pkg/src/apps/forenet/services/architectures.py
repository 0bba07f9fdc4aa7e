from dataclasses import dataclass

from apps.forenet.models import THREE_D_ARCHITECTURES, Architecture
from apps.forenet.services.errors import UnsupportedShape
from apps.forenet.services.layers import (
    INPUT,
    AttentionLayer,
    Conv1DLayer,
    Conv2DLayer,
    DenseLayer,
    FlattenLayer,
    IdentityLayer,
    Layer,
    LstmLayer,
    MultiplyLayer,
    SpatialSoftmaxLayer,
)

CONV_FILTERS = (64, 64, 128)
CONV2D_FILTERS = (64, 32)
KERNEL_SIZE = 3
LSTM_UNITS = 64
MULTIPLY_REPEATS = 3

# smallest window length a stack of three valid k=3 convolutions can consume
MIN_CONV1D_LENGTH = len(CONV_FILTERS) * (KERNEL_SIZE - 1) + 1
MIN_CONV2D_EXTENT = len(CONV2D_FILTERS) * (KERNEL_SIZE - 1) + 1

CONV_ARCHITECTURES = frozenset(
    {
        Architecture.FORENET_2D,
        Architecture.CNN,
        Architecture.CNN_LSTM,
        Architecture.CNN_AM,
    }
)


@dataclass(frozen=True, slots=True)
class ModelSpec:
    architecture: Architecture
    input_shape: tuple[int, ...]
    seed: int = 0
    attention_scale: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        object.__setattr__(self, "input_shape", tuple(int(item) for item in self.input_shape))
        validate_input_shape(self.architecture, self.input_shape)

    @property
    def is_three_d(self) -> bool:
        return self.architecture in THREE_D_ARCHITECTURES

    @classmethod
    def for_window(
        cls,
        architecture: Architecture | str,
        *,
        window_length: int,
        parameter_count: int,
        seed: int = 0,
        attention_scale: bool = False,
    ) -> "ModelSpec":
        architecture = Architecture(architecture)
        shape: tuple[int, ...] = (window_length, parameter_count)
        if architecture in THREE_D_ARCHITECTURES:
            shape = (*shape, 1)
        return cls(
            architecture=architecture,
            input_shape=shape,
            seed=seed,
            attention_scale=attention_scale,
        )


def validate_input_shape(architecture: Architecture, shape: tuple[int, ...]) -> None:
    if any(item < 1 for item in shape):
        raise UnsupportedShape(f"Input shape {shape} has a non-positive dimension.")
    if architecture in THREE_D_ARCHITECTURES:
        if len(shape) != 3 or shape[2] != 1:
            raise UnsupportedShape(f"{architecture.label} takes l x M x 1 windows, got {shape}.")
        if shape[0] < MIN_CONV2D_EXTENT or shape[1] < MIN_CONV2D_EXTENT:
            raise UnsupportedShape(
                f"{architecture.label} needs l and M of at least {MIN_CONV2D_EXTENT}, got {shape}."
            )
        return
    if len(shape) != 2:
        raise UnsupportedShape(f"{architecture.label} takes l x M windows, got {shape}.")
    if architecture in CONV_ARCHITECTURES and shape[0] < MIN_CONV1D_LENGTH:
        raise UnsupportedShape(
            f"{architecture.label} needs a window length of at least {MIN_CONV1D_LENGTH}, got {shape[0]}."
        )


def _conv_stack() -> list[Layer]:
    layers: list[Layer] = []
    previous = INPUT
    for position, filters in enumerate(CONV_FILTERS, start=1):
        name = f"conv1d_{position}"
        layers.append(Conv1DLayer(name=name, inputs=(previous,), filters=filters, kernel_size=KERNEL_SIZE))
        previous = name
    return layers


def _chain(layers: list[Layer], *tail: type[Layer]) -> list[Layer]:
    previous = layers[-1].name if layers else INPUT
    for layer_type in tail:
        name = layer_type.__name__.removesuffix("Layer").lower()
        layer = layer_type(name=name, inputs=(previous,))
        layers.append(layer)
        previous = name
    return layers


def _three_d_layers(*, attention: bool) -> list[Layer]:
    layers: list[Layer] = [
        Conv2DLayer(name="conv2d_1", inputs=(INPUT,), filters=CONV2D_FILTERS[0], kernel_size=KERNEL_SIZE),
        Conv2DLayer(name="conv2d_2", inputs=("conv2d_1",), filters=CONV2D_FILTERS[1], kernel_size=KERNEL_SIZE),
        Conv2DLayer(name="conv2d_3", inputs=("conv2d_2",), filters=1, kernel_size=1, activation="linear"),
    ]
    weight_layer = SpatialSoftmaxLayer if attention else IdentityLayer
    layers.append(weight_layer(name="attention_map", inputs=("conv2d_3",)))
    previous = "conv2d_2"
    for position in range(1, MULTIPLY_REPEATS + 1):
        name = f"multiply_{position}"
        layers.append(MultiplyLayer(name=name, inputs=(previous, "attention_map")))
        previous = name
    layers.append(FlattenLayer(name="flatten", inputs=(previous,)))
    layers.append(DenseLayer(name="dense", inputs=("flatten",)))
    return layers


def layer_plan(architecture: Architecture) -> list[Layer]:
    architecture = Architecture(architecture)
    if architecture == Architecture.FORENET_3D:
        return _three_d_layers(attention=True)
    if architecture == Architecture.CNN_M:
        return _three_d_layers(attention=False)

    layers: list[Layer] = []
    if architecture in CONV_ARCHITECTURES:
        layers = _conv_stack()
    if architecture in {
        Architecture.FORENET_2D,
        Architecture.LSTM,
        Architecture.CNN_LSTM,
        Architecture.LSTM_AM,
    }:
        previous = layers[-1].name if layers else INPUT
        layers.append(LstmLayer(name="lstm", inputs=(previous,), units=LSTM_UNITS))
    if architecture in {Architecture.FORENET_2D, Architecture.CNN_AM, Architecture.LSTM_AM}:
        _chain(layers, AttentionLayer)
    _chain(layers, FlattenLayer)
    layers.append(DenseLayer(name="dense", inputs=(layers[-1].name,)))
    return layers
