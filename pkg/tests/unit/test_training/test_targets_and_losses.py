import math

import numpy as np
import pytest

from src.config.run_config import DisplacementNorm, LossConfig
from src.encoding.displacement import ClampStats, normalize_displacement
from src.models.outputs import ModelOutput
from src.numerics.gradcheck import grad_check
from src.numerics.tensor import Tensor
from src.training.losses import (
    center_loss,
    combined_loss,
    component_losses,
    focal_loss,
    grid_loss,
    weighted_combination,
)
from src.training.targets import gaussian_sigma, render_targets
from src.utils.error_handlers import ConfigError, DimensionError

NORM = DisplacementNorm()
GRID = 8


@pytest.mark.unit
class TestRenderTargets:
    def test_no_objects_gives_empty_maps(self, frame_factory):
        maps = render_targets(frame_factory(1, {}), None, GRID, LossConfig(), NORM)
        assert not maps.heat.any()
        assert maps.num_objects == 0

    def test_center_cell_is_exactly_one(self, frame_factory):
        # cx=0.3 on an 8-cell grid lands in column int(2.4) = 2
        maps = render_targets(frame_factory(1, {1: (0.3, 0.55, 0.1, 0.1)}), None, GRID, LossConfig(), NORM)
        assert maps.heat[0, 4, 2] == 1.0
        assert maps.mask[0, 4, 2] == 1.0
        np.testing.assert_allclose(maps.dims[:, 4, 2], [0.1, 0.1])

    def test_unit_sigma_neighbor_value(self, frame_factory):
        # small box: diagonal in cells < 6, so the sigma floor of 1 applies
        current = frame_factory(1, {1: (0.5, 0.5, 0.05, 0.05)})
        assert gaussian_sigma(0.05, 0.05, GRID, LossConfig()) == 1.0
        maps = render_targets(current, None, GRID, LossConfig(), NORM)
        assert maps.heat[0, 4, 5] == pytest.approx(math.exp(-0.5))
        assert maps.heat[0, 4, 5] == pytest.approx(0.6065, abs=1e-4)

    def test_max_composition_is_order_independent(self, frame_factory):
        boxes = {1: (0.3, 0.3, 0.4, 0.4), 2: (0.45, 0.4, 0.3, 0.3), 3: (0.8, 0.7, 0.2, 0.5)}
        forward = render_targets(frame_factory(1, boxes), None, GRID, LossConfig(), NORM)
        reverse = render_targets(frame_factory(1, dict(reversed(boxes.items()))), None, GRID, LossConfig(), NORM)
        np.testing.assert_array_equal(forward.heat, reverse.heat)
        assert forward.heat.max() <= 1.0
        assert set(zip(*np.nonzero(forward.mask[0]), strict=True)) <= set(zip(*np.nonzero(forward.heat[0] == 1.0), strict=True))

    def test_displacement_from_previous_frame(self, frame_factory):
        previous = frame_factory(1, {7: (0.50, 0.50, 0.1, 0.1)})
        current = frame_factory(2, {7: (0.504, 0.49, 0.1, 0.1), 8: (0.2, 0.2, 0.1, 0.1)})
        maps = render_targets(current, previous, GRID, LossConfig(), NORM)
        np.testing.assert_allclose(maps.disp[:, 3, 4], normalize_displacement((0.004, -0.01), NORM))
        np.testing.assert_allclose(maps.disp[:, 1, 1], normalize_displacement((0.0, 0.0), NORM))
        off_mask = maps.mask[0] == 0
        assert not maps.disp[:, off_mask].any()
        assert not maps.dims[:, off_mask].any()

    def test_off_image_center_is_skipped(self, frame_factory):
        maps = render_targets(frame_factory(1, {1: (1.2, 0.5, 0.3, 0.3)}), None, GRID, LossConfig(), NORM)
        assert maps.skipped == 1
        assert maps.num_objects == 0

    def test_clamped_displacement_is_counted(self, frame_factory):
        stats = ClampStats()
        previous = frame_factory(1, {1: (0.2, 0.5, 0.1, 0.1)})
        current = frame_factory(2, {1: (0.5, 0.5, 0.1, 0.1)})
        render_targets(current, previous, GRID, LossConfig(), NORM, stats)
        assert stats.events == 1

    def test_pixel_weights_follow_alpha(self, frame_factory):
        maps = render_targets(frame_factory(1, {1: (0.5, 0.5, 0.2, 0.2)}), None, GRID, LossConfig(center_alpha=2.0), NORM)
        np.testing.assert_allclose(maps.pixel_weights, 1.0 + 2.0 * maps.heat)


@pytest.mark.unit
class TestHeatmapLosses:
    def test_center_loss_single_cell(self):
        loss = center_loss(Tensor(np.array([[[0.9]]])), np.ones((1, 1, 1)))
        assert loss.item() == pytest.approx(0.10536, abs=1e-5)

    def test_center_loss_is_linear_in_weights(self, rng):
        pred = Tensor(rng.uniform(0.1, 0.9, size=(1, 4, 4)))
        target = rng.uniform(size=(1, 4, 4))
        weights = rng.uniform(0.5, 2.0, size=(1, 4, 4))
        single = center_loss(pred, target, weights).item()
        assert center_loss(pred, target, 2.0 * weights).item() == pytest.approx(2.0 * single)

    def test_center_loss_near_zero_for_perfect_binary_prediction(self):
        target = np.array([[[0.0, 1.0], [1.0, 0.0]]])
        assert center_loss(Tensor(target), target).item() < 1e-6

    def test_focal_loss_values(self):
        assert focal_loss(Tensor(np.array([[[0.5]]])), np.ones((1, 1, 1)), 4.0).item() == pytest.approx(0.0433217, abs=1e-7)
        assert focal_loss(Tensor(np.full((1, 2, 2), 0.3)), np.zeros((1, 2, 2)), 4.0).item() == 0.0
        pred = np.array([[[0.2, 0.7]]])
        assert focal_loss(Tensor(pred), np.ones((1, 1, 2)), 0.0).item() == pytest.approx(-np.log(pred).mean())

    def test_shape_mismatch_raises(self):
        with pytest.raises(DimensionError):
            focal_loss(Tensor(np.zeros((1, 2, 2))), np.zeros((1, 3, 3)))

    def test_losses_are_non_negative(self, rng):
        for _ in range(20):
            pred = Tensor(rng.uniform(0.0, 1.0, size=(1, 3, 3)))
            target = rng.uniform(size=(1, 3, 3))
            assert center_loss(pred, target).item() >= 0.0
            assert focal_loss(pred, target).item() >= 0.0

    def test_heatmap_loss_gradients(self, rng):
        target = rng.uniform(size=(1, 4, 4))
        target[0, 1, 2] = 1.0
        weights = rng.uniform(0.5, 2.0, size=(1, 4, 4))
        x = Tensor.param(rng.uniform(0.1, 0.9, size=(1, 4, 4)))
        assert grad_check(lambda t: center_loss(t, target, weights), x) <= 1e-4
        assert grad_check(lambda t: focal_loss(t, target, 4.0), x) <= 1e-4


@pytest.mark.unit
class TestGridLoss:
    def test_exact_prediction_is_zero(self, rng):
        target = rng.normal(size=(2, 3, 3))
        mask = np.ones((1, 3, 3))
        assert grid_loss(Tensor(target), target, mask).item() == 0.0

    def test_worked_example(self):
        target = np.zeros((2, 2, 2))
        target[:, 0, 1] = (1.0, 2.0)
        pred = np.zeros((2, 2, 2))
        pred[:, 0, 1] = (1.5, 1.5)
        pred[:, 1, 1] = (9.0, 9.0)  # off mask, ignored
        mask = np.zeros((1, 2, 2))
        mask[0, 0, 1] = 1.0
        assert grid_loss(Tensor(pred), target, mask).item() == pytest.approx(0.5)

    def test_empty_mask_is_zero_with_gradient(self, rng):
        pred = Tensor.param(rng.normal(size=(2, 2, 2)))
        loss = grid_loss(pred, np.zeros((2, 2, 2)), np.zeros((1, 2, 2)))
        assert loss.item() == 0.0
        loss.backward()
        assert not pred.grad.any()

    def test_gradient(self, rng):
        target = rng.normal(size=(2, 4, 4))
        mask = (rng.uniform(size=(1, 4, 4)) > 0.5).astype(float)
        mask[0, 0, 0] = 1.0
        x = Tensor.param(target + rng.uniform(0.1, 0.5, size=(2, 4, 4)) * rng.choice([-1, 1], size=(2, 4, 4)))
        assert grid_loss(x, target, mask).item() > 0.0
        assert grad_check(lambda t: grid_loss(t, target, mask), x) <= 1e-4


@pytest.mark.unit
class TestCombinedLoss:
    def test_weighted_mean_of_components(self):
        value = weighted_combination(Tensor(0.3), Tensor(0.6), Tensor(0.9), LossConfig())
        assert value.item() == pytest.approx(0.6)

    def test_scaling_weights_leaves_value_unchanged(self):
        terms = (Tensor(0.3), Tensor(0.6), Tensor(0.9))
        a = weighted_combination(*terms, LossConfig(w1=1.0, w2=2.0, w3=0.5)).item()
        b = weighted_combination(*terms, LossConfig(w1=3.0, w2=6.0, w3=1.5)).item()
        assert a == pytest.approx(b)

    def test_all_zero_weights_rejected(self):
        with pytest.raises(ValueError):
            LossConfig(w1=0.0, w2=0.0, w3=0.0)
        cfg = LossConfig().model_copy(update={"w1": 0.0, "w2": 0.0, "w3": 0.0})
        with pytest.raises(ConfigError):
            weighted_combination(Tensor(1.0), Tensor(1.0), Tensor(1.0), cfg)

    def test_heatmap_only_weights_equal_center_plus_focal(self, rng, frame_factory):
        targets = render_targets(frame_factory(1, {1: (0.4, 0.6, 0.2, 0.2)}), None, 4, LossConfig(), NORM)
        output = ModelOutput(
            heatmap=Tensor(rng.uniform(0.1, 0.9, size=(1, 4, 4))),
            dims=Tensor(rng.uniform(0.1, 0.9, size=(2, 4, 4))),
            disp=Tensor(rng.uniform(-0.9, 0.9, size=(2, 4, 4))),
        )
        cfg = LossConfig(w1=1.0, w2=0.0, w3=0.0)
        terms = component_losses(output, targets, cfg)
        assert set(terms) == {"center", "focal"}
        expected = terms["center"].item() + terms["focal"].item()
        assert combined_loss(output, targets, cfg).item() == pytest.approx(expected)

    def test_dims_only_weights_equal_dims_grid_loss(self, rng, frame_factory):
        targets = render_targets(frame_factory(1, {1: (0.4, 0.6, 0.2, 0.2)}), None, 4, LossConfig(), NORM)
        output = ModelOutput(
            heatmap=Tensor(rng.uniform(0.1, 0.9, size=(1, 4, 4))),
            dims=Tensor(rng.uniform(0.1, 0.9, size=(2, 4, 4))),
            disp=Tensor(rng.uniform(-0.9, 0.9, size=(2, 4, 4))),
        )
        cfg = LossConfig(w1=0.0, w2=1.0, w3=0.0)
        expected = grid_loss(output.dims, targets.dims, targets.mask).item()
        assert combined_loss(output, targets, cfg).item() == pytest.approx(expected)
