import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from apps.tensor_core.services.errors import EmptyBatch, ShapeMismatch, TensorError
from apps.tensor_core.services.tensor import Tensor

ACTIVATIONS = ("relu", "linear")


def _check_activation(activation: str) -> None:
    if activation not in ACTIVATIONS:
        raise TensorError(f"Unsupported activation {activation!r}.")


def _activate(pre: np.ndarray, activation: str) -> tuple[np.ndarray, np.ndarray | None]:
    if activation == "relu":
        mask = pre > 0.0
        return pre * mask, mask
    return pre, None


def conv1d(x: Tensor, weights: Tensor, bias: Tensor, *, activation: str = "relu") -> Tensor:
    _check_activation(activation)
    if x.ndim != 2 or weights.ndim != 3 or bias.ndim != 1:
        raise ShapeMismatch(f"conv1d expects L x C input, got {x.shape} with kernel {weights.shape}.")
    length, channels = x.shape
    kernel, kernel_channels, filters = weights.shape
    if kernel_channels != channels or bias.shape != (filters,) or length < kernel:
        raise ShapeMismatch(
            f"conv1d cannot apply kernel {weights.shape} with bias {bias.shape} to input {x.shape}."
        )
    out_length = length - kernel + 1

    # (L-K+1, C, K)
    windows = sliding_window_view(x.data, kernel, axis=0)
    pre = np.tensordot(windows, weights.data, axes=([1, 2], [1, 0])) + bias.data
    out, mask = _activate(pre, activation)

    def grad_fn(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        upstream = grad * mask if mask is not None else grad
        d_weights = np.tensordot(windows, upstream, axes=([0], [0])).transpose(1, 0, 2)
        d_input = np.zeros_like(x.data)
        for offset in range(kernel):
            d_input[offset : offset + out_length] += upstream @ weights.data[offset].T
        return d_input, d_weights, upstream.sum(axis=0)

    return Tensor.from_op(out, (x, weights, bias), "conv1d", grad_fn)


def conv2d(x: Tensor, weights: Tensor, bias: Tensor, *, activation: str = "relu") -> Tensor:
    _check_activation(activation)
    if x.ndim != 3 or weights.ndim != 4 or bias.ndim != 1:
        raise ShapeMismatch(f"conv2d expects H x W x C input, got {x.shape} with kernel {weights.shape}.")
    height, width, channels = x.shape
    kernel_h, kernel_w, kernel_channels, filters = weights.shape
    if (
        kernel_channels != channels
        or bias.shape != (filters,)
        or height < kernel_h
        or width < kernel_w
    ):
        raise ShapeMismatch(
            f"conv2d cannot apply kernel {weights.shape} with bias {bias.shape} to input {x.shape}."
        )
    out_h = height - kernel_h + 1
    out_w = width - kernel_w + 1

    # (H', W', C, K, K)
    windows = sliding_window_view(x.data, (kernel_h, kernel_w), axis=(0, 1))
    pre = np.tensordot(windows, weights.data, axes=([2, 3, 4], [2, 0, 1])) + bias.data
    out, mask = _activate(pre, activation)

    def grad_fn(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        upstream = grad * mask if mask is not None else grad
        d_weights = np.tensordot(windows, upstream, axes=([0, 1], [0, 1])).transpose(1, 2, 0, 3)
        d_input = np.zeros_like(x.data)
        for row in range(kernel_h):
            for column in range(kernel_w):
                d_input[row : row + out_h, column : column + out_w] += np.tensordot(
                    upstream, weights.data[row, column], axes=([2], [1])
                )
        return d_input, d_weights, upstream.sum(axis=(0, 1))

    return Tensor.from_op(out, (x, weights, bias), "conv2d", grad_fn)


def _sigmoid(values: np.ndarray) -> np.ndarray:
    out = np.empty_like(values)
    positive = values >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-values[positive]))
    exp_values = np.exp(values[~positive])
    out[~positive] = exp_values / (1.0 + exp_values)
    return out


def lstm(x: Tensor, kernel: Tensor, recurrent: Tensor, bias: Tensor) -> Tensor:
    """Single-layer LSTM returning the full hidden sequence, zero initial state.

    Gate blocks along the last weight axis are ordered input, forget, cell, output.
    """
    if x.ndim != 2 or kernel.ndim != 2 or recurrent.ndim != 2 or bias.ndim != 1:
        raise ShapeMismatch(f"lstm expects T x D input, got {x.shape}.")
    steps, features = x.shape
    units = recurrent.shape[0]
    if (
        steps < 1
        or kernel.shape != (features, 4 * units)
        or recurrent.shape != (units, 4 * units)
        or bias.shape != (4 * units,)
    ):
        raise ShapeMismatch(
            f"lstm weights {kernel.shape}, {recurrent.shape}, {bias.shape} do not fit input {x.shape}."
        )

    projected = x.data @ kernel.data + bias.data
    gates = np.zeros((steps, 4 * units))
    cells = np.zeros((steps, units))
    hidden = np.zeros((steps, units))
    h_prev = np.zeros(units)
    c_prev = np.zeros(units)
    for step in range(steps):
        z = projected[step] + h_prev @ recurrent.data
        gates[step, : 2 * units] = _sigmoid(z[: 2 * units])
        gates[step, 2 * units : 3 * units] = np.tanh(z[2 * units : 3 * units])
        gates[step, 3 * units :] = _sigmoid(z[3 * units :])
        input_gate = gates[step, :units]
        forget_gate = gates[step, units : 2 * units]
        candidate = gates[step, 2 * units : 3 * units]
        output_gate = gates[step, 3 * units :]
        cells[step] = forget_gate * c_prev + input_gate * candidate
        hidden[step] = output_gate * np.tanh(cells[step])
        h_prev = hidden[step]
        c_prev = cells[step]

    def grad_fn(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        d_gates = np.zeros_like(gates)
        dh_next = np.zeros(units)
        dc_next = np.zeros(units)
        for step in reversed(range(steps)):
            input_gate = gates[step, :units]
            forget_gate = gates[step, units : 2 * units]
            candidate = gates[step, 2 * units : 3 * units]
            output_gate = gates[step, 3 * units :]
            tanh_cell = np.tanh(cells[step])
            c_before = cells[step - 1] if step > 0 else np.zeros(units)

            dh = grad[step] + dh_next
            d_output = dh * tanh_cell
            dc = dc_next + dh * output_gate * (1.0 - tanh_cell**2)
            d_forget = dc * c_before
            d_input = dc * candidate
            d_candidate = dc * input_gate
            dc_next = dc * forget_gate

            d_gates[step, :units] = d_input * input_gate * (1.0 - input_gate)
            d_gates[step, units : 2 * units] = d_forget * forget_gate * (1.0 - forget_gate)
            d_gates[step, 2 * units : 3 * units] = d_candidate * (1.0 - candidate**2)
            d_gates[step, 3 * units :] = d_output * output_gate * (1.0 - output_gate)
            dh_next = d_gates[step] @ recurrent.data.T

        h_before = np.vstack([np.zeros((1, units)), hidden[:-1]])
        return (
            d_gates @ kernel.data.T,
            x.data.T @ d_gates,
            h_before.T @ d_gates,
            d_gates.sum(axis=0),
        )

    return Tensor.from_op(hidden, (x, kernel, recurrent, bias), "lstm", grad_fn)


def _row_softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    exp_scores = np.exp(shifted)
    return exp_scores / exp_scores.sum(axis=-1, keepdims=True)


def dot_attention(h: Tensor, *, scaled: bool = False) -> Tensor:
    if h.ndim != 2 or h.shape[0] < 1:
        raise ShapeMismatch(f"dot_attention expects T x U input, got {h.shape}.")
    factor = 1.0 / math.sqrt(h.shape[1]) if scaled else 1.0
    weights = _row_softmax(factor * (h.data @ h.data.T))
    out = weights @ h.data

    def grad_fn(grad: np.ndarray) -> tuple[np.ndarray]:
        d_weights = grad @ h.data.T
        d_scores = weights * (d_weights - (d_weights * weights).sum(axis=1, keepdims=True))
        d_h = weights.T @ grad + factor * (d_scores + d_scores.T) @ h.data
        return (d_h,)

    return Tensor.from_op(out, (h,), "dot_attention", grad_fn)


def spatial_softmax(feature_map: Tensor) -> Tensor:
    if feature_map.ndim != 3 or feature_map.shape[2] != 1:
        raise ShapeMismatch(f"spatial_softmax expects H x W x 1, got {feature_map.shape}.")
    flat = feature_map.data.ravel()
    weights = _row_softmax(flat).reshape(feature_map.shape)

    def grad_fn(grad: np.ndarray) -> tuple[np.ndarray]:
        return (weights * (grad - float(np.sum(grad * weights))),)

    return Tensor.from_op(weights, (feature_map,), "spatial_softmax", grad_fn)


def broadcast_multiply(features: Tensor, weights: Tensor) -> Tensor:
    if (
        features.ndim != 3
        or weights.ndim != 3
        or weights.shape[2] != 1
        or features.shape[:2] != weights.shape[:2]
    ):
        raise ShapeMismatch(
            f"broadcast_multiply cannot combine {features.shape} with {weights.shape}."
        )
    out = features.data * weights.data

    def grad_fn(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return grad * weights.data, np.sum(grad * features.data, axis=2, keepdims=True)

    return Tensor.from_op(out, (features, weights), "broadcast_multiply", grad_fn)


def dense(x: Tensor, weights: Tensor, bias: Tensor, *, activation: str = "linear") -> Tensor:
    _check_activation(activation)
    if x.ndim != 1 or weights.ndim != 2 or weights.shape[0] != x.shape[0] or bias.shape != (weights.shape[1],):
        raise ShapeMismatch(
            f"dense cannot apply weights {weights.shape} with bias {bias.shape} to input {x.shape}."
        )
    out, mask = _activate(x.data @ weights.data + bias.data, activation)

    def grad_fn(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        upstream = grad * mask if mask is not None else grad
        return weights.data @ upstream, np.outer(x.data, upstream), upstream

    return Tensor.from_op(out, (x, weights, bias), "dense", grad_fn)


def flatten(x: Tensor) -> Tensor:
    shape = x.data.shape

    def grad_fn(grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad.reshape(shape),)

    return Tensor.from_op(x.data.reshape(-1), (x,), "flatten", grad_fn)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0.0

    def grad_fn(grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad * mask,)

    return Tensor.from_op(x.data * mask, (x,), "relu", grad_fn)


def mse_loss(prediction: Tensor, target: np.ndarray | float) -> Tensor:
    target_values = np.broadcast_to(np.asarray(target, dtype=np.float64), prediction.data.shape)
    if prediction.size == 0:
        raise EmptyBatch("Cannot compute a loss over zero predictions.")
    residual = prediction.data - target_values
    loss = np.asarray(np.mean(residual**2))

    def grad_fn(grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad * 2.0 * residual / residual.size,)

    return Tensor.from_op(loss, (prediction,), "mse", grad_fn)


def rmse(predicted: np.ndarray, target: np.ndarray) -> float:
    predicted = np.asarray(predicted, dtype=np.float64).ravel()
    target = np.asarray(target, dtype=np.float64).ravel()
    if predicted.size == 0:
        raise EmptyBatch("RMSE needs at least one prediction.")
    if predicted.shape != target.shape:
        raise ShapeMismatch(f"RMSE got {predicted.size} predictions for {target.size} targets.")
    return float(np.sqrt(np.mean((predicted - target) ** 2)))
