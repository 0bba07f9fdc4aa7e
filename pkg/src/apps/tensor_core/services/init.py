import math

import numpy as np


def glorot_uniform(
    rng: np.random.Generator,
    shape: tuple[int, ...],
    *,
    fan_in: int,
    fan_out: int,
) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def conv_kernel(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    receptive = int(np.prod(shape[:-2]))
    return glorot_uniform(rng, shape, fan_in=receptive * shape[-2], fan_out=receptive * shape[-1])


def dense_kernel(rng: np.random.Generator, inputs: int, units: int) -> np.ndarray:
    return glorot_uniform(rng, (inputs, units), fan_in=inputs, fan_out=units)


def lstm_kernels(
    rng: np.random.Generator,
    features: int,
    units: int,
    *,
    forget_bias: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    kernel = glorot_uniform(rng, (features, 4 * units), fan_in=features, fan_out=4 * units)
    limit = 1.0 / math.sqrt(units)
    recurrent = rng.uniform(-limit, limit, size=(units, 4 * units))
    bias = np.zeros(4 * units)
    bias[units : 2 * units] = forget_bias
    return kernel, recurrent, bias
