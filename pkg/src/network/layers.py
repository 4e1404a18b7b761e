"""Parameter initialization and the layer functions the network is built from.

Parameters live in one flat ``dict[str, Tensor]`` keyed by dotted names; each
layer function reads its weights under a name prefix.
"""
import math

import numpy as np
from scipy.stats import truncnorm

from src.numerics.tensor import Tensor, concat, conv2d, layer_norm, matmul, softmax_lastdim

Params = dict[str, Tensor]

INIT_STD = 0.02


def truncated_normal(shape: tuple[int, ...], rng: np.random.Generator, std: float = INIT_STD) -> np.ndarray:
    """Normal samples cut at two standard deviations."""
    size = int(np.prod(shape)) if shape else 1
    values = truncnorm.rvs(-2.0, 2.0, loc=0.0, scale=std, size=size, random_state=rng)
    return np.asarray(values, dtype=np.float64).reshape(shape)


def init_linear(params: Params, prefix: str, fan_in: int, fan_out: int, rng: np.random.Generator, zero: bool = False) -> None:
    weight = np.zeros((fan_in, fan_out)) if zero else truncated_normal((fan_in, fan_out), rng)
    params[f"{prefix}.weight"] = Tensor.param(weight)
    params[f"{prefix}.bias"] = Tensor.param(np.zeros(fan_out))


def init_conv(
    params: Params, prefix: str, in_channels: int, out_channels: int, size: int, rng: np.random.Generator, zero: bool = False
) -> None:
    shape = (out_channels, in_channels, size, size)
    params[f"{prefix}.weight"] = Tensor.param(np.zeros(shape) if zero else truncated_normal(shape, rng))
    params[f"{prefix}.bias"] = Tensor.param(np.zeros(out_channels))


def init_layer_norm(params: Params, prefix: str, width: int) -> None:
    params[f"{prefix}.gain"] = Tensor.param(np.ones(width))
    params[f"{prefix}.bias"] = Tensor.param(np.zeros(width))


def init_encoder_block(params: Params, prefix: str, embed_dim: int, mlp_ratio: int, rng: np.random.Generator) -> None:
    init_layer_norm(params, f"{prefix}.ln1", embed_dim)
    for name in ("query", "key", "value", "out"):
        init_linear(params, f"{prefix}.attn.{name}", embed_dim, embed_dim, rng)
    init_layer_norm(params, f"{prefix}.ln2", embed_dim)
    init_linear(params, f"{prefix}.mlp.fc1", embed_dim, mlp_ratio * embed_dim, rng)
    init_linear(params, f"{prefix}.mlp.fc2", mlp_ratio * embed_dim, embed_dim, rng)


def linear(x: Tensor, params: Params, prefix: str) -> Tensor:
    return matmul(x, params[f"{prefix}.weight"]) + params[f"{prefix}.bias"]


def conv(x: Tensor, params: Params, prefix: str, padding: int = 1) -> Tensor:
    kernel = params[f"{prefix}.weight"]
    bias = params[f"{prefix}.bias"].reshape(kernel.shape[0], 1, 1)
    return conv2d(x, kernel, stride=1, padding=padding) + bias


def norm(x: Tensor, params: Params, prefix: str) -> Tensor:
    return layer_norm(x, params[f"{prefix}.gain"], params[f"{prefix}.bias"])


def self_attention(x: Tensor, params: Params, prefix: str, heads: int) -> Tensor:
    """Multi-head scaled dot-product attention over the rows of x [N, n_d]."""
    width = x.shape[1] // heads
    scale = 1.0 / math.sqrt(width)
    query = linear(x, params, f"{prefix}.query")
    key = linear(x, params, f"{prefix}.key")
    value = linear(x, params, f"{prefix}.value")
    outputs = []
    for h in range(heads):
        cols = slice(h * width, (h + 1) * width)
        q, k, v = query[:, cols], key[:, cols], value[:, cols]
        weights = softmax_lastdim(matmul(q, k.T) * scale)
        outputs.append(matmul(weights, v))
    merged = outputs[0] if heads == 1 else concat(outputs, axis=1)
    return linear(merged, params, f"{prefix}.out")


def encoder_block(x: Tensor, params: Params, prefix: str, heads: int) -> Tensor:
    """Pre-norm transformer block: attention and MLP, each with a residual."""
    x = x + self_attention(norm(x, params, f"{prefix}.ln1"), params, f"{prefix}.attn", heads)
    hidden = linear(norm(x, params, f"{prefix}.ln2"), params, f"{prefix}.mlp.fc1").relu()
    return x + linear(hidden, params, f"{prefix}.mlp.fc2")
