import numpy as np
import pytest

from src.config.run_config import PipelineConfig
from src.encoding.frames import (
    FrameWindow,
    build_windows,
    frame_partial_projections,
    patchify_project,
    stack_window,
    unstack_window,
)
from src.numerics.tensor import Tensor
from src.utils.error_handlers import ConfigError, ContractError


def _frames(rng: np.random.Generator, count: int, size: int) -> list[np.ndarray]:
    return [rng.uniform(0.0, 1.0, size=(3, size, size)) for _ in range(count)]


@pytest.mark.unit
class TestFrameWindow:
    def test_rejects_out_of_range_values(self):
        with pytest.raises(ContractError):
            FrameWindow([np.full((3, 4, 4), 1.5)], (4, 4), 1)

    def test_rejects_mixed_shapes(self, rng):
        with pytest.raises(ContractError):
            FrameWindow([rng.uniform(size=(3, 4, 4)), rng.uniform(size=(3, 8, 8))], (4, 4), 1)

    def test_rejects_non_square_or_wrong_channels(self, rng):
        with pytest.raises(ContractError):
            FrameWindow([rng.uniform(size=(3, 4, 6))], (4, 6), 1)
        with pytest.raises(ContractError):
            FrameWindow([rng.uniform(size=(1, 4, 4))], (4, 4), 1)

    def test_check_against_config(self, rng):
        window = FrameWindow(_frames(rng, 2, 16), (32, 48), 2)
        window.check(PipelineConfig(image_size=16, patch_size=8, window=2))
        with pytest.raises(ConfigError):
            window.check(PipelineConfig(image_size=16, patch_size=8, window=3))

    def test_build_windows_pads_start_with_first_frame(self, rng):
        frames = _frames(rng, 4, 8)
        windows = build_windows(frames, 3, (8, 8))
        assert [w.frame_index for w in windows] == [1, 2, 3, 4]
        assert all(w.window == 3 for w in windows)
        first = windows[0].frames
        assert all(np.array_equal(f, frames[0]) for f in first)
        assert np.array_equal(windows[1].frames[1], frames[0])
        assert np.array_equal(windows[1].frames[2], frames[1])
        assert [id(f) for f in windows[3].frames] == [id(frames[1]), id(frames[2]), id(frames[3])]


@pytest.mark.unit
class TestStackWindow:
    def test_single_frame_is_identity(self, rng):
        frame = _frames(rng, 1, 8)[0]
        stacked = stack_window(FrameWindow([frame], (8, 8), 1))
        np.testing.assert_array_equal(stacked.data, frame)

    def test_five_frames_at_224_gives_fifteen_channels(self):
        frames = [np.zeros((3, 224, 224)) for _ in range(5)]
        assert stack_window(FrameWindow(frames, (224, 224), 5)).shape == (15, 224, 224)

    def test_oldest_frame_first(self, rng):
        frames = _frames(rng, 2, 64)
        stacked = stack_window(FrameWindow(frames, (64, 64), 2))
        assert stacked.shape == (6, 64, 64)
        np.testing.assert_array_equal(stacked.data[0:3], frames[0])
        np.testing.assert_array_equal(stacked.data[3:6], frames[1])

    def test_unstack_recovers_frames(self, rng):
        frames = _frames(rng, 4, 8)
        recovered = unstack_window(stack_window(FrameWindow(frames, (8, 8), 4)), 4)
        for original, back in zip(frames, recovered, strict=True):
            np.testing.assert_array_equal(original, back)
        with pytest.raises(ContractError):
            unstack_window(Tensor(np.zeros((9, 8, 8))), 4)


@pytest.mark.unit
class TestPatchifyProject:
    @pytest.mark.parametrize(("size", "patch", "expected"), [(224, 16, 196), (64, 8, 64), (16, 16, 1)])
    def test_token_count(self, size, patch, expected):
        proj = Tensor(np.zeros((4, 3, patch, patch)))
        tokens = patchify_project(Tensor(np.zeros((3, size, size))), proj)
        assert tokens.shape == (expected, 4)

    def test_single_patch_is_full_image_projection(self, rng):
        image = rng.uniform(size=(3, 8, 8))
        proj = rng.normal(size=(5, 3, 8, 8))
        tokens = patchify_project(Tensor(image), Tensor(proj))
        expected = proj.reshape(5, -1) @ image.reshape(-1)
        np.testing.assert_allclose(tokens.data[0], expected)

    def test_row_major_patch_order(self, rng):
        image = np.zeros((3, 16, 16))
        image[:, 0:8, 8:16] = 1.0  # top-right patch
        proj = np.ones((1, 3, 8, 8))
        tokens = patchify_project(Tensor(image), Tensor(proj)).data[:, 0]
        np.testing.assert_allclose(tokens, [0.0, 192.0, 0.0, 0.0])

    def test_indivisible_size_raises(self):
        with pytest.raises(ConfigError):
            patchify_project(Tensor(np.zeros((3, 10, 10))), Tensor(np.zeros((2, 3, 4, 4))))

    def test_partials_sum_to_stacked_projection(self, rng):
        frames = _frames(rng, 3, 16)
        stacked = stack_window(FrameWindow(frames, (16, 16), 3))
        proj = Tensor(rng.normal(size=(4, 9, 8, 8)))
        partials = frame_partial_projections(stacked, proj, 3)
        assert len(partials) == 3
        np.testing.assert_allclose(sum(p.data for p in partials), patchify_project(stacked, proj).data, atol=1e-12)
