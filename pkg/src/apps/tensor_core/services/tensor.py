from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from apps.tensor_core.services.errors import (
    GraphCycle,
    NonFiniteActivation,
    NonFiniteGradient,
    ShapeMismatch,
)

GradFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]


class Tensor:
    """Float64 array node that records how it was computed.

    Parameters and inputs are leaves; every op result keeps its parents and a
    ``grad_fn`` mapping the upstream gradient onto one gradient per parent.
    """

    __slots__ = ("data", "grad", "requires_grad", "op", "name", "_parents", "_grad_fn")

    def __init__(
        self,
        data: np.ndarray | float | Sequence[float],
        *,
        requires_grad: bool = False,
        name: str = "",
    ) -> None:
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.op = "leaf"
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._grad_fn: GradFn | None = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self.op!r}, name={self.name!r})"

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(item) for item in self.data.shape)

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def ndim(self) -> int:
        return int(self.data.ndim)

    @property
    def parents(self) -> tuple["Tensor", ...]:
        return self._parents

    @classmethod
    def from_op(
        cls,
        data: np.ndarray,
        parents: Sequence["Tensor"],
        op: str,
        grad_fn: GradFn,
    ) -> "Tensor":
        if not np.all(np.isfinite(data)):
            raise NonFiniteActivation(f"Operation {op} produced a non-finite value.")
        out = cls(data)
        out.op = op
        out._parents = tuple(parents)
        out.requires_grad = any(parent.requires_grad for parent in out._parents)
        if out.requires_grad:
            out._grad_fn = grad_fn
        return out

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate(self, delta: np.ndarray) -> None:
        if delta.shape != self.data.shape:
            raise ShapeMismatch(
                f"Gradient of shape {delta.shape} cannot update tensor of shape {self.shape}."
            )
        if self.grad is None:
            self.grad = np.array(delta, dtype=np.float64, copy=True)
        else:
            self.grad += delta

    def backward(self, seed: np.ndarray | float | None = None) -> None:
        upstream = np.ones_like(self.data) if seed is None else np.asarray(seed, dtype=np.float64)
        order = topological_order(self)
        # interior gradients are scratch space; leaves keep accumulating
        for node in order:
            if node._grad_fn is not None:
                node.grad = None
        self.accumulate(np.broadcast_to(upstream, self.data.shape))

        for node in reversed(order):
            if node._grad_fn is None or node.grad is None:
                continue
            parent_grads = node._grad_fn(node.grad)
            for parent, delta in zip(node._parents, parent_grads, strict=True):
                if delta is None or not parent.requires_grad:
                    continue
                if not np.all(np.isfinite(delta)):
                    raise NonFiniteGradient(f"Backward through {node.op} produced a non-finite gradient.")
                parent.accumulate(delta)
            node.grad = None


def topological_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    state: dict[int, int] = {}
    stack: list[tuple[Tensor, int]] = [(root, 0)]
    while stack:
        node, position = stack.pop()
        key = id(node)
        if position == 0:
            mark = state.get(key)
            if mark == 2:
                continue
            if mark == 1:
                raise GraphCycle(f"Tensor produced by {node.op} depends on itself.")
            state[key] = 1
        if position < len(node._parents):
            stack.append((node, position + 1))
            parent = node._parents[position]
            parent_mark = state.get(id(parent))
            if parent_mark == 1:
                raise GraphCycle(f"Tensor produced by {parent.op} depends on itself.")
            if parent_mark is None:
                stack.append((parent, 0))
            continue
        state[key] = 2
        order.append(node)
    return order


@dataclass(slots=True)
class LayerParams:
    entries: dict[str, Tensor] = field(default_factory=dict)

    def add(self, name: str, data: np.ndarray) -> Tensor:
        if name in self.entries:
            raise ShapeMismatch(f"Parameter {name} is declared twice.")
        tensor = Tensor(data, requires_grad=True, name=name)
        self.entries[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self.entries[name]

    def __iter__(self) -> Iterator[tuple[str, Tensor]]:
        return iter(self.entries.items())

    def __len__(self) -> int:
        return len(self.entries)

    def count(self) -> int:
        return sum(tensor.size for tensor in self.entries.values())

    def manifest(self) -> list[dict[str, object]]:
        return [{"name": name, "shape": list(tensor.shape)} for name, tensor in self]

    def zero_grad(self) -> None:
        for tensor in self.entries.values():
            tensor.zero_grad()

    def gradients(self) -> dict[str, np.ndarray]:
        return {
            name: tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
            for name, tensor in self
        }

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: tensor.data.copy() for name, tensor in self}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for name, tensor in self:
            value = np.asarray(arrays[name], dtype=np.float64)
            if value.shape != tensor.data.shape:
                raise ShapeMismatch(f"Parameter {name} expects {tensor.shape}, got {value.shape}.")
            tensor.data = value.copy()

    def flat(self) -> np.ndarray:
        if not self.entries:
            return np.zeros(0, dtype=np.float64)
        return np.concatenate([tensor.data.ravel() for tensor in self.entries.values()])

    def load_flat(self, values: np.ndarray) -> None:
        if values.shape != (self.count(),):
            raise ShapeMismatch(f"Expected {self.count()} parameter values, got {values.shape}.")
        offset = 0
        for _, tensor in self:
            size = tensor.size
            tensor.data = values[offset : offset + size].reshape(tensor.shape).astype(np.float64)
            offset += size
