import logging
from dataclasses import dataclass, field

import numpy as np

from apps.tensor_core.services.errors import NonFiniteGradient, ShapeMismatch
from apps.tensor_core.services.tensor import LayerParams

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class AdamState:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(
        cls,
        params: LayerParams,
        *,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ) -> "AdamState":
        return cls(
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
            first_moment={name: np.zeros_like(tensor.data) for name, tensor in params},
            second_moment={name: np.zeros_like(tensor.data) for name, tensor in params},
        )


def adam_step(params: LayerParams, grads: dict[str, np.ndarray], state: AdamState) -> AdamState:
    if set(grads) != set(params.entries):
        raise ShapeMismatch("Gradients and parameters name different tensors.")
    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for name, tensor in params:
        grad = grads[name]
        if grad.shape != tensor.data.shape:
            raise ShapeMismatch(f"Gradient for {name} has shape {grad.shape}, expected {tensor.shape}.")
        first = state.first_moment.setdefault(name, np.zeros_like(tensor.data))
        second = state.second_moment.setdefault(name, np.zeros_like(tensor.data))
        first *= state.beta1
        first += (1.0 - state.beta1) * grad
        second *= state.beta2
        second += (1.0 - state.beta2) * grad**2
        corrected_first = first / correction1
        corrected_second = second / correction2
        tensor.data = tensor.data - state.learning_rate * corrected_first / (
            np.sqrt(corrected_second) + state.epsilon
        )
    return state


def clip_by_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> tuple[dict[str, np.ndarray], float]:
    norm = float(np.sqrt(sum(float(np.sum(grad**2)) for grad in grads.values())))
    if not np.isfinite(norm):
        raise NonFiniteGradient("Gradient norm is not finite.")
    if max_norm <= 0.0 or norm <= max_norm:
        return grads, norm
    factor = max_norm / norm
    logger.debug("Clipped gradients.", extra={"norm": norm, "max_norm": max_norm})
    return {name: grad * factor for name, grad in grads.items()}, norm
