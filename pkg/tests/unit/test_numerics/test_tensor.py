import numpy as np
import pytest

from src.numerics.gradcheck import grad_check
from src.numerics.tensor import (
    Tensor,
    add_all,
    concat,
    conv2d,
    layer_norm,
    matmul,
    pointwise,
    softmax_lastdim,
)
from src.utils.error_handlers import ContractError, DimensionError

TOLERANCE = 1e-4


def _weights(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Random read-out weights so no gradient element is identically zero."""
    return rng.normal(size=shape)


def _away_from_zero(rng: np.random.Generator, shape: tuple[int, ...], margin: float = 0.1) -> np.ndarray:
    values = rng.uniform(margin, 2.0, size=shape)
    return values * rng.choice([-1.0, 1.0], size=shape)


@pytest.mark.unit
class TestTensorArithmetic:
    def test_add_and_mul_broadcast_gradients(self, rng):
        other = Tensor(rng.normal(size=(4,)))
        w = _weights(rng, (3, 4))
        x = Tensor.param(rng.normal(size=(3, 4)))
        assert grad_check(lambda t: ((t * other + t - other) * w).sum(), x) <= TOLERANCE

    def test_broadcast_operand_receives_summed_gradient(self, rng):
        x = Tensor(rng.normal(size=(3, 4)))
        b = Tensor.param(rng.normal(size=(4,)))
        (x + b).sum().backward()
        np.testing.assert_allclose(b.grad, np.full(4, 3.0))

    def test_division_and_reflected_operators(self, rng):
        w = _weights(rng, (2, 3))
        x = Tensor.param(rng.uniform(0.5, 2.0, size=(2, 3)))
        assert grad_check(lambda t: ((1.0 / t + 2.0 - t / 3.0) * w).sum(), x) <= TOLERANCE

    def test_ndarray_on_the_left_defers_to_tensor(self, rng):
        x = Tensor.param(rng.normal(size=(2, 2)))
        out = np.ones((2, 2)) * x
        assert isinstance(out, Tensor)
        out.sum().backward()
        np.testing.assert_allclose(x.grad, np.ones((2, 2)))

    def test_pow(self, rng):
        w = _weights(rng, (5,))
        x = Tensor.param(rng.uniform(0.5, 1.5, size=(5,)))
        assert grad_check(lambda t: (t.pow(2.5) * w).sum(), x) <= TOLERANCE
        assert grad_check(lambda t: ((t**3) * w).sum(), x) <= TOLERANCE

    def test_matmul(self, rng):
        b = Tensor(rng.normal(size=(4, 2)))
        w = _weights(rng, (3, 2))
        x = Tensor.param(rng.normal(size=(3, 4)))
        left = Tensor(rng.normal(size=(2, 3)))
        w_left = _weights(rng, (2, 4))
        assert grad_check(lambda t: ((t @ b) * w).sum(), x) <= TOLERANCE
        assert grad_check(lambda t: (matmul(left, t) * w_left).sum(), x) <= TOLERANCE

    def test_matmul_shape_mismatch_raises(self):
        with pytest.raises(DimensionError):
            matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


@pytest.mark.unit
class TestTensorElementwise:
    @pytest.mark.parametrize("op", ["exp", "sigmoid", "tanh"])
    def test_smooth_unary(self, rng, op):
        w = _weights(rng, (3, 3))
        x = Tensor.param(rng.normal(size=(3, 3)))
        assert grad_check(lambda t: (getattr(t, op)() * w).sum(), x) <= TOLERANCE

    def test_log(self, rng):
        w = _weights(rng, (6,))
        x = Tensor.param(rng.uniform(0.2, 3.0, size=(6,)))
        assert grad_check(lambda t: (t.log() * w).sum(), x) <= TOLERANCE

    @pytest.mark.parametrize("op", ["abs", "relu"])
    def test_kinked_unary_away_from_kink(self, rng, op):
        w = _weights(rng, (4, 4))
        x = Tensor.param(_away_from_zero(rng, (4, 4)))
        assert grad_check(lambda t: (getattr(t, op)() * w).sum(), x) <= TOLERANCE

    def test_clip_passes_gradient_inside_range_only(self):
        x = Tensor.param(np.array([-2.0, 0.3, 2.0]))
        x.clip(-1.0, 1.0).sum().backward()
        np.testing.assert_array_equal(x.grad, [0.0, 1.0, 0.0])

    def test_pointwise_dispatch(self, rng):
        x = Tensor(rng.normal(size=(3,)))
        np.testing.assert_allclose(pointwise("relu", x).data, np.maximum(x.data, 0.0))
        np.testing.assert_allclose(pointwise("tanh", x).data, np.tanh(x.data))
        with pytest.raises(ContractError):
            pointwise("gelu", x)  # type: ignore[arg-type]


@pytest.mark.unit
class TestTensorReductionsAndShapes:
    def test_sum_and_mean_over_axes(self, rng):
        w = _weights(rng, (3,))
        x = Tensor.param(rng.normal(size=(3, 4)))
        assert grad_check(lambda t: (t.sum(axis=1) * w).sum(), x) <= TOLERANCE
        assert grad_check(lambda t: (t.mean(axis=1) * w).sum(), x) <= TOLERANCE
        assert grad_check(lambda t: t.mean() * 2.0, x) <= TOLERANCE

    def test_reshape_permute_transpose(self, rng):
        w = _weights(rng, (4, 3, 2))
        x = Tensor.param(rng.normal(size=(2, 3, 4)))
        assert grad_check(lambda t: (t.permute(2, 1, 0) * w).sum(), x) <= TOLERANCE
        w2 = _weights(rng, (6, 4))
        assert grad_check(lambda t: (t.reshape(6, 4) * w2).sum(), x) <= TOLERANCE
        m = Tensor.param(rng.normal(size=(2, 5)))
        assert m.T.shape == (5, 2)
        assert grad_check(lambda t: (t.T * _weights(np.random.default_rng(3), (5, 2))).sum(), m) <= TOLERANCE

    def test_bad_reshape_raises(self):
        with pytest.raises(DimensionError):
            Tensor(np.ones((2, 3))).reshape(4, 2)

    def test_getitem_slices(self, rng):
        w = _weights(rng, (2, 4))
        x = Tensor.param(rng.normal(size=(5, 4)))
        assert grad_check(lambda t: (t[1:3] * w).sum(), x) <= TOLERANCE
        x.zero_grad()
        x[2].sum().backward()
        expected = np.zeros((5, 4))
        expected[2] = 1.0
        np.testing.assert_array_equal(x.grad, expected)

    def test_concat(self, rng):
        other = Tensor(rng.normal(size=(2, 3)))
        w = _weights(rng, (5, 3))
        x = Tensor.param(rng.normal(size=(3, 3)))
        assert grad_check(lambda t: (concat([t, other], axis=0) * w).sum(), x) <= TOLERANCE

    def test_concat_mismatch_raises(self):
        with pytest.raises(DimensionError):
            concat([Tensor(np.ones((2, 3))), Tensor(np.ones((2, 4)))], axis=0)

    def test_add_all(self, rng):
        parts = [Tensor(rng.normal(size=(2, 2))) for _ in range(3)]
        np.testing.assert_allclose(add_all(parts).data, sum(p.data for p in parts))
        with pytest.raises(ContractError):
            add_all([])


@pytest.mark.unit
class TestTensorComposites:
    @pytest.mark.parametrize(("stride", "padding"), [(1, 0), (1, 1), (2, 0), (4, 0)])
    def test_conv2d_input_and_kernel_gradients(self, rng, stride, padding):
        inputs = Tensor.param(rng.normal(size=(2, 8, 8)))
        kernel = Tensor.param(rng.normal(size=(3, 2, 4, 4)) * 0.3)
        out_shape = conv2d(inputs, kernel, stride, padding).shape
        w = _weights(rng, out_shape)
        assert grad_check(lambda t: (conv2d(t, kernel, stride, padding) * w).sum(), inputs) <= TOLERANCE
        assert grad_check(lambda t: (conv2d(inputs, t, stride, padding) * w).sum(), kernel) <= TOLERANCE

    def test_conv2d_matches_direct_correlation(self, rng):
        x = rng.normal(size=(1, 4, 4))
        k = rng.normal(size=(1, 1, 2, 2))
        out = conv2d(Tensor(x), Tensor(k)).data
        expected = np.array([[np.sum(x[0, i : i + 2, j : j + 2] * k[0, 0]) for j in range(3)] for i in range(3)])
        np.testing.assert_allclose(out[0], expected)

    def test_conv2d_rejects_bad_shapes(self):
        with pytest.raises(DimensionError):
            conv2d(Tensor(np.ones((2, 4, 4))), Tensor(np.ones((1, 3, 2, 2))))
        with pytest.raises(DimensionError):
            conv2d(Tensor(np.ones((1, 2, 2))), Tensor(np.ones((1, 1, 3, 3))))

    def test_softmax_rows_sum_to_one_and_gradient(self, rng):
        x = Tensor.param(rng.normal(size=(3, 5)))
        np.testing.assert_allclose(softmax_lastdim(x).data.sum(axis=-1), np.ones(3))
        w = _weights(rng, (3, 5))
        assert grad_check(lambda t: (softmax_lastdim(t) * w).sum(), x) <= TOLERANCE

    def test_layer_norm_gradients(self, rng):
        gain = Tensor.param(rng.uniform(0.5, 1.5, size=(6,)))
        bias = Tensor.param(rng.normal(size=(6,)))
        x = Tensor.param(rng.normal(size=(4, 6)))
        w = _weights(rng, (4, 6))
        assert grad_check(lambda t: (layer_norm(t, gain, bias) * w).sum(), x) <= TOLERANCE
        assert grad_check(lambda t: (layer_norm(x, t, bias) * w).sum(), gain) <= TOLERANCE
        assert grad_check(lambda t: (layer_norm(x, gain, t) * w).sum(), bias) <= TOLERANCE


@pytest.mark.unit
class TestGraph:
    def test_fan_out_gradients_accumulate(self):
        x = Tensor.param(np.array([1.5, -2.0]))
        (x * x + x).sum().backward()
        np.testing.assert_allclose(x.grad, 2.0 * x.data + 1.0)

    def test_shared_subexpression_visited_once(self):
        x = Tensor.param(np.array([3.0]))
        y = x * 2.0
        (y + y).sum().backward()
        np.testing.assert_allclose(x.grad, [4.0])

    def test_backward_requires_scalar(self):
        x = Tensor.param(np.ones((2, 2)))
        with pytest.raises(ContractError):
            (x * 2.0).backward()

    def test_untracked_leaves_get_no_gradient(self):
        constant = Tensor(np.ones(3))
        x = Tensor.param(np.ones(3))
        (constant * x).sum().backward()
        assert constant.grad is None

    def test_scalar_tensor_keeps_zero_dims(self):
        assert Tensor(0.0).shape == ()
        x = Tensor.param(np.array(1.5))
        assert (x * 2.0).sum().shape == ()
        assert grad_check(lambda t: (t * t * 3.0).sum(), x) <= TOLERANCE
        (x * x).sum().backward()
        np.testing.assert_allclose(x.grad, 3.0)
        assert Tensor(np.ones((2, 2))).sum().shape == ()

    def test_item_requires_single_element(self):
        assert Tensor(np.array([[2.5]])).item() == 2.5
        with pytest.raises(ContractError):
            Tensor(np.ones(2)).item()
