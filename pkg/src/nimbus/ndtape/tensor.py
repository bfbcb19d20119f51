"""Dense float32 tensors with reverse-mode differentiation on an explicit tape.

The tape is define-by-run: operations executed inside a ``with Tape() as t:``
block are recorded (when an input requires gradients) and ``t.backward(loss)``
replays them in reverse exactly once.  Outside a tape context the same
operations run as plain numpy computations with no recording overhead.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

__all__ = ["Tensor", "Tape", "ContractViolation", "as_tensor", "active_tape"]


class ContractViolation(ValueError):
    """An operation was called outside its documented contract."""


class Tensor:
    """A dense float32 array, optionally tracked for gradients.

    ``grad`` accumulates across backward passes until ``zero_grad`` style
    clearing by the optimizer; ``node_id`` is assigned when the tensor first
    participates in a recorded operation.
    """

    __slots__ = ("data", "requires_grad", "grad", "node_id")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float32)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self.node_id: int | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def accumulate_grad(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float32, copy=True)
        else:
            self.grad += g

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # Arithmetic sugar; implementations live in ops.py (circular-import safe).
    def _ops(self):
        from . import ops
        return ops

    def __add__(self, other):
        return self._ops().add(self, other)

    def __radd__(self, other):
        return self._ops().add(other, self)

    def __sub__(self, other):
        return self._ops().sub(self, other)

    def __rsub__(self, other):
        return self._ops().sub(other, self)

    def __mul__(self, other):
        return self._ops().mul(self, other)

    def __rmul__(self, other):
        return self._ops().mul(other, self)

    def __truediv__(self, other):
        return self._ops().div(self, other)

    def __rtruediv__(self, other):
        return self._ops().div(other, self)

    def __neg__(self):
        return self._ops().neg(self)

    def __matmul__(self, other):
        return self._ops().matmul(self, other)


def as_tensor(x) -> Tensor:
    """Wrap arrays/scalars as constant tensors; pass tensors through."""
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=np.float32))


class _Node:
    __slots__ = ("name", "inputs", "output", "backward_fn")

    def __init__(self, name: str, inputs: Sequence[Tensor], output: Tensor,
                 backward_fn: Callable[[np.ndarray], Sequence[np.ndarray | None]]):
        self.name = name
        self.inputs = tuple(inputs)
        self.output = output
        self.backward_fn = backward_fn


_TAPE_STACK: list["Tape"] = []


def active_tape() -> "Tape | None":
    return _TAPE_STACK[-1] if _TAPE_STACK else None


class Tape:
    """Ordered record of primitive operations for one reverse pass.

    Single-threaded by contract; independent tapes may live on independent
    threads.  The node list is cleared after ``backward`` runs.
    """

    def __init__(self):
        self._nodes: list[_Node] = []
        self._ids: dict[int, int] = {}  # id(tensor) -> node_id on this tape
        self._next_id = 0

    def __enter__(self) -> "Tape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        assert _TAPE_STACK and _TAPE_STACK[-1] is self
        _TAPE_STACK.pop()

    def _assign_id(self, t: Tensor) -> None:
        if id(t) not in self._ids:
            self._ids[id(t)] = self._next_id
            t.node_id = self._next_id
            self._next_id += 1

    def record(self, name: str, inputs: Sequence[Tensor], output: Tensor,
               backward_fn: Callable) -> None:
        for t in inputs:
            self._assign_id(t)
        self._assign_id(output)
        self._nodes.append(_Node(name, inputs, output, backward_fn))

    def __len__(self) -> int:
        return len(self._nodes)

    def backward(self, loss: Tensor) -> dict[int, np.ndarray]:
        """Accumulate dloss/dx into every recorded tensor, in reverse order.

        Returns a map from node_id to gradient array.  The tape is cleared
        afterwards and cannot be reused.
        """
        if loss.size != 1:
            raise ContractViolation(
                f"backward requires a scalar loss, got shape {loss.shape}")
        if not self._nodes:
            raise ContractViolation("backward on an empty tape")

        grads: dict[int, np.ndarray] = {}  # keyed by id(tensor)
        if id(loss) not in self._ids:
            # loss was never recorded: nothing depends on tape inputs
            self._nodes.clear()
            return {}
        grads[id(loss)] = np.ones_like(loss.data)

        for node in reversed(self._nodes):
            gout = grads.get(id(node.output))
            if gout is None:
                continue
            gins = node.backward_fn(gout)
            for t, g in zip(node.inputs, gins):
                if g is None:
                    continue
                key = id(t)
                if key in grads:
                    grads[key] = grads[key] + g
                else:
                    grads[key] = np.asarray(g, dtype=np.float32)

        # materialize .grad on leaf tensors only (parameters, not the
        # intermediates produced by recorded ops)
        produced = {id(node.output) for node in self._nodes}
        seen: set[int] = set()
        by_node_id: dict[int, np.ndarray] = {}
        for node in self._nodes:
            for t in node.inputs + (node.output,):
                key = id(t)
                if key in seen or key not in grads:
                    continue
                seen.add(key)
                by_node_id[self._ids[key]] = grads[key]
                if t.requires_grad and key not in produced:
                    t.accumulate_grad(grads[key])
        self._nodes.clear()
        self._ids.clear()
        return by_node_id
