import numpy as np
import pytest

from src.network import layers
from src.numerics.gradcheck import grad_check
from src.numerics.tensor import Tensor


@pytest.fixture
def block_params(rng):
    params: layers.Params = {}
    layers.init_encoder_block(params, "block", 8, 2, rng)
    for name, p in params.items():
        if name.endswith(".weight"):
            p.data = rng.normal(scale=0.3, size=p.shape)
    return params


@pytest.mark.unit
class TestInitializers:
    def test_truncated_normal_is_bounded(self, rng):
        values = layers.truncated_normal((2000,), rng, std=0.02)
        assert np.all(np.abs(values) <= 0.04)
        assert 0.01 < values.std() < 0.02

    def test_linear_and_conv_shapes(self, rng):
        params: layers.Params = {}
        layers.init_linear(params, "fc", 3, 5, rng)
        layers.init_conv(params, "conv", 4, 2, 3, rng, zero=True)
        assert params["fc.weight"].shape == (3, 5)
        assert params["fc.bias"].shape == (5,)
        assert params["conv.weight"].shape == (2, 4, 3, 3)
        assert not params["conv.weight"].data.any()

    def test_encoder_block_parameter_names(self, rng):
        params: layers.Params = {}
        layers.init_encoder_block(params, "encoder.0", 8, 2, rng)
        assert {"encoder.0.ln1.gain", "encoder.0.attn.query.weight", "encoder.0.mlp.fc2.bias"} <= set(params)
        assert params["encoder.0.mlp.fc1.weight"].shape == (8, 16)


@pytest.mark.unit
class TestAttention:
    def test_output_shape_matches_input(self, rng, block_params):
        x = Tensor(rng.normal(size=(5, 8)))
        assert layers.encoder_block(x, block_params, "block", heads=2).shape == (5, 8)

    def test_permutation_equivariance(self, rng, block_params):
        x = rng.normal(size=(6, 8))
        order = rng.permutation(6)
        out = layers.encoder_block(Tensor(x), block_params, "block", heads=2).data
        permuted = layers.encoder_block(Tensor(x[order]), block_params, "block", heads=2).data
        np.testing.assert_allclose(permuted, out[order], atol=1e-12)

    def test_single_head_matches_direct_formula(self, rng):
        params: layers.Params = {}
        for name in ("query", "key", "value", "out"):
            layers.init_linear(params, f"attn.{name}", 4, 4, rng)
        x = rng.normal(size=(3, 4))
        q = x @ params["attn.query.weight"].data
        k = x @ params["attn.key.weight"].data
        v = x @ params["attn.value.weight"].data
        scores = q @ k.T / 2.0
        weights = np.exp(scores - scores.max(axis=1, keepdims=True))
        weights /= weights.sum(axis=1, keepdims=True)
        expected = (weights @ v) @ params["attn.out.weight"].data
        out = layers.self_attention(Tensor(x), params, "attn", heads=1).data
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_encoder_block_gradient(self, rng, block_params):
        x = Tensor.param(rng.normal(size=(4, 8)))
        w = rng.normal(size=(4, 8))
        assert grad_check(lambda t: (layers.encoder_block(t, block_params, "block", 2) * w).sum(), x) <= 1e-4
        weight = block_params["block.attn.key.weight"]
        assert grad_check(lambda _: (layers.encoder_block(x, block_params, "block", 2) * w).sum(), weight) <= 1e-4
