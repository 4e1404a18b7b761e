"""Shared test fixtures: small configurations, seeded generators and temporary output."""
from pathlib import Path

import numpy as np
import pytest

from src.config.run_config import ModelConfig, PipelineConfig, RunConfig, SynthConfig
from src.models.annotations import AnnotatedBox, AnnotationRole, FrameAnnotations
from src.models.tracking import BBox


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def temp_output_dir(tmp_path: Path) -> Path:
    """Output directory that does not exist yet."""
    return tmp_path / "output"


@pytest.fixture
def tiny_model_config() -> ModelConfig:
    """A model small enough for gradient checks: S=16, P=8, W=2, n_d=8, R=4."""
    return ModelConfig(
        pipeline=PipelineConfig(image_size=16, patch_size=8, window=2, embed_dim=8),
        layers=1,
        heads=2,
        mlp_ratio=2,
        grid_size=4,
        head_hidden=4,
    )


@pytest.fixture
def tiny_synth_config() -> SynthConfig:
    return SynthConfig(
        num_sequences=2,
        frames_per_sequence=4,
        min_objects=1,
        max_objects=2,
        image_size=32,
        occluder_events=1,
        occluder_duration=2,
        seed=7,
    )


@pytest.fixture
def tiny_run_config(tmp_path: Path, tiny_model_config: ModelConfig, tiny_synth_config: SynthConfig) -> RunConfig:
    """Full run config over the tiny model, writing under ``tmp_path``."""
    return RunConfig.model_validate(
        {
            "model": tiny_model_config.model_dump(mode="json"),
            "synth": tiny_synth_config.model_dump(mode="json"),
            "schedule": {"epochs_per_phase": 2, "patience": 1, "accumulation": 2},
            "paths": {"data_dir": str(tmp_path / "data"), "output_dir": str(tmp_path / "output")},
            "workers": 1,
        }
    )


def make_frame(frame: int, boxes: dict[int, tuple[float, float, float, float]], role=AnnotationRole.GROUND_TRUTH):
    """FrameAnnotations from ``{id: (cx, cy, w, h)}``."""
    return FrameAnnotations(frame, [AnnotatedBox(i, BBox(*b)) for i, b in boxes.items()], role)


@pytest.fixture
def frame_factory():
    return make_frame
