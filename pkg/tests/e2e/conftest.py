"""E2E fixtures: the desk-scale smoke configuration."""
import pytest

from src.config.run_config import RunConfig


@pytest.fixture(scope="session")
def smoke_config(tmp_path_factory) -> RunConfig:
    """S=64, P=8, W=5, n_d=64, L=2, R=16 over 20 synthetic sequences of 10 frames.

    Two samples per optimizer step give 100 steps per epoch. The scenes hold one
    to three slow, mid-sized objects.
    """
    root = tmp_path_factory.mktemp("smoke")
    return RunConfig.model_validate(
        {
            "model": {
                "pipeline": {"image_size": 64, "patch_size": 8, "window": 5, "embed_dim": 64},
                "layers": 2,
                "heads": 4,
                "grid_size": 16,
            },
            "synth": {
                "num_sequences": 20,
                "frames_per_sequence": 10,
                "min_objects": 1,
                "max_objects": 3,
                "min_size": 0.15,
                "max_size": 0.25,
                "velocity_max": 0.002,
                "seed": 0,
            },
            "schedule": {"epochs_per_phase": 5, "patience": 4, "accumulation": 2, "learning_rate": 0.002},
            "paths": {"data_dir": str(root / "data"), "output_dir": str(root / "output")},
            "seed": 0,
        }
    )
