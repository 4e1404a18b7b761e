"""Dense float64 tensor with reverse-mode differentiation.

Every differentiable operation records its inputs and a local backward rule on
the output tensor. ``Graph`` orders the recorded nodes topologically and
propagates gradients from a scalar loss to the leaves that require them.
Storage is always a contiguous float64 ``numpy`` array; operations copy rather
than share strided views.
"""
from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from typing import Any, Literal

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from src.utils.error_handlers import ContractError, DimensionError

BackwardRule = Callable[[np.ndarray], tuple[np.ndarray | None, ...]]


def _as_array(value: Any) -> np.ndarray:
    return np.array(value, dtype=np.float64, order="C")


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """N-dimensional float64 array with optional gradient tracking."""

    __slots__ = ("_backward", "_parents", "data", "grad", "op", "requires_grad")
    # ndarray <op> Tensor defers to the Tensor's reflected operator
    __array_ufunc__ = None

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        _parents: tuple[Tensor, ...] = (),
        _backward: BackwardRule | None = None,
        op: str = "leaf",
    ):
        self.data = _as_array(data)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self._parents = _parents
        self._backward = _backward
        self.op = op

    # -- construction helpers ------------------------------------------------

    @classmethod
    def param(cls, data: Any) -> Tensor:
        """Create a trainable leaf."""
        return cls(data, requires_grad=True)

    @classmethod
    def zeros(cls, shape: Sequence[int], requires_grad: bool = False) -> Tensor:
        return cls(np.zeros(tuple(shape)), requires_grad=requires_grad)

    @classmethod
    def ones(cls, shape: Sequence[int], requires_grad: bool = False) -> Tensor:
        return cls(np.ones(tuple(shape)), requires_grad=requires_grad)

    @staticmethod
    def _wrap(other: Tensor | float | int | np.ndarray) -> Tensor:
        return other if isinstance(other, Tensor) else Tensor(other)

    @staticmethod
    def _record(data: np.ndarray, parents: tuple[Tensor, ...], rule: BackwardRule, op: str) -> Tensor:
        if any(p.requires_grad for p in parents):
            return Tensor(data, requires_grad=True, _parents=parents, _backward=rule, op=op)
        return Tensor(data, op=op)

    # -- introspection ---------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return int(self.data.ndim)

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return not self._parents

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError("item() requires a single-element tensor", {"shape": list(self.shape)})
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def detach(self) -> Tensor:
        return Tensor(self.data.copy())

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self.op}, requires_grad={self.requires_grad})"

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: Tensor | float | np.ndarray) -> Tensor:
        other = self._wrap(other)
        a_shape, b_shape = self.shape, other.shape

        def rule(g: np.ndarray) -> tuple[np.ndarray | None, ...]:
            return _unbroadcast(g, a_shape), _unbroadcast(g, b_shape)

        return self._record(self.data + other.data, (self, other), rule, "add")

    __radd__ = __add__

    def __neg__(self) -> Tensor:
        return self._record(-self.data, (self,), lambda g: (-g,), "neg")

    def __sub__(self, other: Tensor | float | np.ndarray) -> Tensor:
        return self + (-self._wrap(other))

    def __rsub__(self, other: Tensor | float | np.ndarray) -> Tensor:
        return self._wrap(other) + (-self)

    def __mul__(self, other: Tensor | float | np.ndarray) -> Tensor:
        other = self._wrap(other)
        a, b = self.data, other.data

        def rule(g: np.ndarray) -> tuple[np.ndarray | None, ...]:
            return _unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)

        return self._record(a * b, (self, other), rule, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other: Tensor | float | np.ndarray) -> Tensor:
        other = self._wrap(other)
        return self * other.pow(-1.0)

    def __rtruediv__(self, other: Tensor | float | np.ndarray) -> Tensor:
        return self._wrap(other) * self.pow(-1.0)

    def pow(self, exponent: float) -> Tensor:
        a = self.data

        def rule(g: np.ndarray) -> tuple[np.ndarray | None, ...]:
            return (g * exponent * np.power(a, exponent - 1.0),)

        return self._record(np.power(a, exponent), (self,), rule, "pow")

    def __pow__(self, exponent: float) -> Tensor:
        return self.pow(exponent)

    def __matmul__(self, other: Tensor) -> Tensor:
        return matmul(self, other)

    # -- elementwise -----------------------------------------------------------

    def exp(self) -> Tensor:
        out = np.exp(self.data)
        return self._record(out, (self,), lambda g: (g * out,), "exp")

    def log(self) -> Tensor:
        a = self.data
        return self._record(np.log(a), (self,), lambda g: (g / a,), "log")

    def abs(self) -> Tensor:
        a = self.data
        return self._record(np.abs(a), (self,), lambda g: (g * np.sign(a),), "abs")

    def sigmoid(self) -> Tensor:
        out = expit(self.data)
        return self._record(out, (self,), lambda g: (g * out * (1.0 - out),), "sigmoid")

    def tanh(self) -> Tensor:
        out = np.tanh(self.data)
        return self._record(out, (self,), lambda g: (g * (1.0 - out * out),), "tanh")

    def relu(self) -> Tensor:
        mask = self.data > 0
        return self._record(self.data * mask, (self,), lambda g: (g * mask,), "relu")

    def clip(self, low: float, high: float) -> Tensor:
        """Clamp values; the gradient passes only where the value was inside the range."""
        mask = (self.data >= low) & (self.data <= high)
        return self._record(np.clip(self.data, low, high), (self,), lambda g: (g * mask,), "clip")

    # -- reductions ------------------------------------------------------------

    def sum(self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> Tensor:
        shape = self.shape

        def rule(g: np.ndarray) -> tuple[np.ndarray | None, ...]:
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        return self._record(np.sum(self.data, axis=axis, keepdims=keepdims), (self,), rule, "sum")

    def mean(self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> Tensor:
        if axis is None:
            count = self.size
        else:
            axes = (axis,) if isinstance(axis, int) else axis
            count = int(np.prod([self.shape[a] for a in axes]))
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    # -- shape -----------------------------------------------------------------

    def reshape(self, *shape: int | Sequence[int]) -> Tensor:
        target = tuple(shape[0]) if len(shape) == 1 and not isinstance(shape[0], int) else shape
        original = self.shape
        try:
            out = self.data.reshape(target)  # type: ignore[arg-type]
        except ValueError as e:
            raise DimensionError(f"cannot reshape {original} to {target}", [original]) from e
        return self._record(out.copy(), (self,), lambda g: (g.reshape(original),), "reshape")

    def permute(self, *axes: int) -> Tensor:
        inverse = tuple(np.argsort(axes))
        out = np.ascontiguousarray(np.transpose(self.data, axes))
        return self._record(out, (self,), lambda g: (np.transpose(g, inverse),), "permute")

    def transpose(self) -> Tensor:
        if self.ndim != 2:
            raise DimensionError("transpose() expects a 2-d tensor", [self.shape])
        return self.permute(1, 0)

    @property
    def T(self) -> Tensor:
        return self.transpose()

    def __getitem__(self, index: Any) -> Tensor:
        """Basic indexing (integers and slices) only."""
        shape = self.shape

        def rule(g: np.ndarray) -> tuple[np.ndarray | None, ...]:
            full = np.zeros(shape)
            full[index] += g
            return (full,)

        return self._record(np.array(self.data[index]), (self,), rule, "getitem")

    # -- differentiation -------------------------------------------------------

    def backward(self) -> None:
        """Populate ``grad`` on every leaf of the recorded graph that requires it."""
        Graph(self).backward()


class Graph:
    """Recorded operations reachable from one output, in topological order."""

    def __init__(self, output: Tensor):
        self.output = output
        self.nodes = self._topological_order(output)

    @staticmethod
    def _topological_order(output: Tensor) -> list[Tensor]:
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(output, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def backward(self) -> None:
        if self.output.size != 1:
            raise ContractError("backward() requires a scalar loss", {"shape": list(self.output.shape)})
        if not self.output.requires_grad:
            raise ContractError("loss is not on a recorded graph")

        pending: dict[int, np.ndarray] = {id(self.output): np.ones_like(self.output.data)}
        for node in reversed(self.nodes):
            grad = pending.pop(id(node), None)
            if grad is None:
                continue
            if node.is_leaf:
                node.grad = grad.copy() if node.grad is None else node.grad + grad
                continue
            assert node._backward is not None
            for parent, parent_grad in zip(node._parents, node._backward(grad), strict=True):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                pending[key] = parent_grad if key not in pending else pending[key] + parent_grad


# -- free-standing operations ----------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of a [m,k] and b [k,n]."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shapes {a.shape} and {b.shape} are incompatible", [a.shape, b.shape])
    x, y = a.data, b.data

    def rule(g: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return g @ y.T, x.T @ g

    return Tensor._record(x @ y, (a, b), rule, "matmul")


def _conv_columns(x: np.ndarray, size: int, stride: int) -> np.ndarray:
    windows = sliding_window_view(x, (size, size), axis=(1, 2))[:, ::stride, ::stride]
    channels, out_h, out_w = windows.shape[:3]
    return windows.transpose(1, 2, 0, 3, 4).reshape(out_h * out_w, channels * size * size)


def conv2d(inputs: Tensor, kernel: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """2-d cross-correlation of inputs [C,H,W] with kernel [O,C,K,K]."""
    if inputs.ndim != 3 or kernel.ndim != 4 or kernel.shape[1] != inputs.shape[0]:
        raise DimensionError(
            f"conv2d expects input [C,H,W] and kernel [O,C,K,K]; got {inputs.shape} and {kernel.shape}",
            [inputs.shape, kernel.shape],
        )
    if stride < 1:
        raise DimensionError(f"stride must be positive, got {stride}", [inputs.shape])
    out_channels, channels, size, size_w = kernel.shape
    if size != size_w:
        raise DimensionError("conv2d expects square kernels", [kernel.shape])

    x = np.pad(inputs.data, ((0, 0), (padding, padding), (padding, padding))) if padding else inputs.data
    height, width = x.shape[1:]
    if size > height or size > width:
        raise DimensionError(f"kernel {size}x{size} larger than input {height}x{width}", [inputs.shape, kernel.shape])
    out_h = (height - size) // stride + 1
    out_w = (width - size) // stride + 1

    cols = _conv_columns(x, size, stride)
    weights = kernel.data.reshape(out_channels, -1)
    out = (cols @ weights.T).T.reshape(out_channels, out_h, out_w)
    input_shape = inputs.shape

    def rule(g: np.ndarray) -> tuple[np.ndarray | None, ...]:
        g_cols = g.reshape(out_channels, -1).T
        grad_kernel = (g_cols.T @ cols).reshape(kernel.shape)
        d_cols = (g_cols @ weights).reshape(out_h, out_w, channels, size, size).transpose(2, 0, 1, 3, 4)
        grad_x = np.zeros((channels, height, width))
        for i in range(size):
            for j in range(size):
                grad_x[:, i : i + stride * out_h : stride, j : j + stride * out_w : stride] += d_cols[:, :, :, i, j]
        if padding:
            grad_x = grad_x[:, padding : height - padding, padding : width - padding]
        assert grad_x.shape == input_shape
        return grad_x, grad_kernel

    return Tensor._record(np.ascontiguousarray(out), (inputs, kernel), rule, "conv2d")


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """Concatenate along ``axis``."""
    if not tensors:
        raise ContractError("concat() needs at least one tensor")
    extents = [t.shape[axis] for t in tensors]
    bounds = np.cumsum([0, *extents])

    def rule(g: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return tuple(np.take(g, range(bounds[i], bounds[i + 1]), axis=axis) for i in range(len(tensors)))

    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as e:
        raise DimensionError(str(e), [t.shape for t in tensors]) from e
    return Tensor._record(out, tuple(tensors), rule, "concat")


def add_all(tensors: Iterable[Tensor]) -> Tensor:
    """Sum a non-empty sequence of same-shape tensors."""
    items = list(tensors)
    if not items:
        raise ContractError("add_all() needs at least one tensor")
    total = items[0]
    for item in items[1:]:
        total = total + item
    return total


def pointwise(op: Literal["sigmoid", "tanh", "relu"], x: Tensor) -> Tensor:
    """Apply a named elementwise activation."""
    if op == "sigmoid":
        return x.sigmoid()
    if op == "tanh":
        return x.tanh()
    if op == "relu":
        return x.relu()
    raise ContractError(f"unknown pointwise op '{op}'")


def softmax_lastdim(x: Tensor) -> Tensor:
    """Numerically stable softmax over the last axis."""
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    out = exps / exps.sum(axis=-1, keepdims=True)

    def rule(g: np.ndarray) -> tuple[np.ndarray | None, ...]:
        return (out * (g - (g * out).sum(axis=-1, keepdims=True)),)

    return Tensor._record(out, (x,), rule, "softmax")


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize each row to zero mean and unit variance, then apply gain and bias."""
    if gain.shape != (x.shape[-1],) or bias.shape != (x.shape[-1],):
        raise DimensionError("layer_norm gain/bias must match the last extent", [x.shape, gain.shape, bias.shape])
    mean = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mean
    inv_std = 1.0 / np.sqrt((centered**2).mean(axis=-1, keepdims=True) + eps)
    normed = centered * inv_std
    out = normed * gain.data + bias.data

    def rule(g: np.ndarray) -> tuple[np.ndarray | None, ...]:
        g_normed = g * gain.data
        grad_x = inv_std * (
            g_normed - g_normed.mean(axis=-1, keepdims=True) - normed * (g_normed * normed).mean(axis=-1, keepdims=True)
        )
        reduce_axes = tuple(range(g.ndim - 1))
        return grad_x, (g * normed).sum(axis=reduce_axes), g.sum(axis=reduce_axes)

    return Tensor._record(out, (x, gain, bias), rule, "layer_norm")
