from pathlib import Path

import numpy as np
import pytest

from src.dataio.frames import decode_ppm, encode_ppm, frame_name, frame_size, list_frame_files, load_frames
from src.utils.error_handlers import FrameSequenceError


def _write_frames(directory: Path, frames: dict[int, np.ndarray], suffix: str = ".ppm") -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for index, frame in frames.items():
        path = directory / frame_name(index, suffix)
        if suffix == ".npy":
            np.save(path, frame)
        else:
            path.write_bytes(encode_ppm(frame))


@pytest.mark.unit
class TestPixmaps:
    def test_solid_gray_decodes_to_half(self):
        content = encode_ppm(np.full((3, 4, 6), 0.5))
        assert content.startswith(b"P6")
        pixels = decode_ppm(content)
        assert pixels.shape == (3, 4, 6)
        assert np.all(np.abs(pixels - 0.5) <= 1.0 / 255.0)

    def test_values_quantized_to_bytes(self, rng):
        frame = rng.uniform(size=(3, 8, 8))
        assert np.max(np.abs(decode_ppm(encode_ppm(frame)) - frame)) <= 0.5 / 255.0 + 1e-12

    def test_frame_name(self):
        assert frame_name(7) == "000007.ppm"
        assert frame_name(12, ".npy") == "000012.npy"


@pytest.mark.unit
class TestLoadFrames:
    def test_numeric_order(self, tmp_path):
        _write_frames(tmp_path, {i: np.full((3, 8, 8), i / 20.0) for i in range(10, 0, -1)})
        frames, size = load_frames(tmp_path, 8)
        assert len(frames) == 10
        assert size == (8, 8)
        np.testing.assert_allclose([f.mean() for f in frames], [i / 20.0 for i in range(1, 11)], atol=1 / 255)

    def test_gap_is_named(self, tmp_path):
        _write_frames(tmp_path, {i: np.zeros((3, 4, 4)) for i in range(1, 11) if i != 7})
        with pytest.raises(FrameSequenceError) as excinfo:
            load_frames(tmp_path, 4)
        assert excinfo.value.missing == ["000007"]
        assert "000007" in excinfo.value.message

    def test_resizes_to_square_input(self, tmp_path):
        _write_frames(tmp_path, {1: np.full((3, 12, 20), 0.4)})
        frames, size = load_frames(tmp_path, 8)
        assert frames[0].shape == (3, 8, 8)
        assert size == (12, 20)
        assert frame_size(tmp_path) == (12, 20)
        np.testing.assert_allclose(frames[0], 0.4, atol=1 / 255)

    def test_raw_dumps(self, tmp_path):
        raw = np.linspace(0.0, 1.0, 3 * 4 * 4).reshape(3, 4, 4)
        _write_frames(tmp_path, {1: raw, 2: raw[::-1].copy()}, ".npy")
        frames, _ = load_frames(tmp_path, 4)
        np.testing.assert_array_equal(frames[0], raw)
        np.testing.assert_array_equal(frames[1], raw[::-1])

    def test_raw_dump_with_bad_shape(self, tmp_path):
        _write_frames(tmp_path, {1: np.zeros((4, 4))}, ".npy")
        with pytest.raises(FrameSequenceError):
            load_frames(tmp_path, 4)

    def test_unreadable_frame(self, tmp_path):
        tmp_path.joinpath("000001.ppm").write_bytes(b"not an image")
        with pytest.raises(FrameSequenceError):
            load_frames(tmp_path, 4)

    def test_missing_or_empty_directory(self, tmp_path):
        with pytest.raises(FrameSequenceError):
            list_frame_files(tmp_path / "absent")
        (tmp_path / "notes.txt").write_text("x")
        with pytest.raises(FrameSequenceError):
            list_frame_files(tmp_path)
