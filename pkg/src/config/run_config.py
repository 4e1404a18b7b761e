"""Run configuration: every tunable of the pipeline, validated before any work starts."""
import json
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, ValidationError, model_validator

from src.utils.error_handlers import ConfigError


class EmbeddingMode(str, Enum):
    """How temporal/spatial identity is added to tokens."""

    CHANNEL_WISE = "channel_wise"
    POSITIONAL = "positional"


class TokenMode(str, Enum):
    """How the temporal window is turned into a token sequence."""

    STACKED = "stacked"
    STREAMED = "streamed"


class CostMode(str, Enum):
    """Dissimilarity used for detection-to-track association."""

    IOU = "iou"
    DISTANCE = "distance"


class PipelineConfig(BaseModel):
    """Input geometry and token layout."""

    model_config = {"extra": "forbid"}

    image_size: int = Field(default=64, gt=0, description="Square input side S in pixels")
    patch_size: int = Field(default=8, gt=0, description="Patch side P in pixels")
    window: int = Field(default=5, ge=1, description="Frames per window W")
    embed_dim: int = Field(default=64, ge=1, description="Token width n_d")
    embedding_mode: EmbeddingMode = EmbeddingMode.CHANNEL_WISE
    token_mode: TokenMode = TokenMode.STACKED

    @model_validator(mode="after")
    def _check_patch_grid(self) -> "PipelineConfig":
        if self.image_size % self.patch_size != 0:
            raise ValueError(f"image_size {self.image_size} is not divisible by patch_size {self.patch_size}")
        return self

    @property
    def grid_side(self) -> int:
        return self.image_size // self.patch_size

    @property
    def num_patches(self) -> int:
        return self.grid_side**2

    @property
    def num_tokens(self) -> int:
        if self.token_mode == TokenMode.STREAMED:
            return self.window * self.num_patches
        return self.num_patches


class ModelConfig(BaseModel):
    """Encoder and head sizes."""

    model_config = {"extra": "forbid"}

    pipeline: PipelineConfig = Field(default_factory=PipelineConfig)
    layers: int = Field(default=2, ge=0, description="Transformer blocks L")
    heads: int = Field(default=4, ge=1, description="Attention heads h")
    mlp_ratio: int = Field(default=2, ge=1)
    grid_size: int = Field(default=16, ge=2, description="Output grid side R")
    head_hidden: int = Field(default=16, ge=1, description="Hidden width of each output head")

    @model_validator(mode="after")
    def _check_shapes(self) -> "ModelConfig":
        if self.pipeline.embed_dim % self.heads != 0:
            raise ValueError(f"embed_dim {self.pipeline.embed_dim} is not divisible by heads {self.heads}")
        if self.grid_size % self.pipeline.grid_side != 0:
            raise ValueError(
                f"grid_size {self.grid_size} is not divisible by the patch grid side {self.pipeline.grid_side}"
            )
        return self

    @property
    def block_size(self) -> int:
        """Output cells per patch along one axis."""
        return self.grid_size // self.pipeline.grid_side


class DisplacementNorm(BaseModel):
    """Per-axis displacement range, as image fractions per frame step."""

    model_config = {"extra": "forbid", "frozen": True}

    min_x: float = -0.0174
    max_x: float = 0.0057
    min_y: float = -0.0157
    max_y: float = 0.0166

    @model_validator(mode="after")
    def _check_ranges(self) -> "DisplacementNorm":
        if not (self.min_x < self.max_x and self.min_y < self.max_y):
            raise ValueError("displacement ranges need min < max on both axes")
        return self


class LossConfig(BaseModel):
    """Loss weights and target rendering policy."""

    model_config = {"extra": "forbid"}

    gamma: float = Field(default=4.0, ge=0.0)
    w1: float = Field(default=1.0, ge=0.0, description="Heatmap (center + focal) weight")
    w2: float = Field(default=1.0, ge=0.0, description="Dimension grid weight")
    w3: float = Field(default=1.0, ge=0.0, description="Displacement grid weight")
    center_alpha: float = Field(default=0.0, ge=0.0, description="Pixel weights W_i = 1 + alpha * P_i")
    sigma_divisor: float = Field(default=6.0, gt=0.0)
    sigma_floor: float = Field(default=1.0, gt=0.0)

    @model_validator(mode="after")
    def _check_weights(self) -> "LossConfig":
        if self.w1 + self.w2 + self.w3 <= 0:
            raise ValueError("loss weights w1, w2, w3 must not all be zero")
        return self


class TmpSchedule(BaseModel):
    """Part-based multitask training schedule and optimizer settings."""

    model_config = {"extra": "forbid"}

    epochs_per_phase: int = Field(default=50, ge=0)
    patience: int = Field(default=10, ge=1)
    use_tmp: bool = True
    joint_only_epochs: int | None = Field(default=None, ge=0, description="Epochs of the single joint phase")
    learning_rate: float = Field(default=1e-3, gt=0.0)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    adam_eps: float = Field(default=1e-8, gt=0.0)
    accumulation: int = Field(default=8, ge=1, description="Samples per optimizer step")

    @model_validator(mode="after")
    def _check_patience(self) -> "TmpSchedule":
        if self.epochs_per_phase > 0 and self.patience >= self.epochs_per_phase:
            raise ValueError(f"patience {self.patience} must be below epochs_per_phase {self.epochs_per_phase}")
        return self

    @property
    def joint_epochs(self) -> int:
        if self.joint_only_epochs is not None:
            return self.joint_only_epochs
        return 4 * self.epochs_per_phase


class AssocConfig(BaseModel):
    """Decoding and association thresholds."""

    model_config = {"extra": "forbid"}

    heat_threshold: float = Field(default=0.4, gt=0.0, lt=1.0)
    nms_iou: float = Field(default=0.5, gt=0.0, lt=1.0)
    match_min_iou: float = Field(default=0.1, gt=0.0, lt=1.0)
    max_lost: int = Field(default=10, ge=0)
    cost_mode: CostMode = CostMode.IOU
    max_center_distance: float = Field(default=0.1, gt=0.0)


class SynthConfig(BaseModel):
    """Synthetic sequence generator settings."""

    model_config = {"extra": "forbid"}

    num_sequences: int = Field(default=20, ge=1)
    frames_per_sequence: int = Field(default=10, ge=1)
    min_objects: int = Field(default=2, ge=0)
    max_objects: int = Field(default=4, ge=0)
    image_size: int = Field(default=64, gt=0)
    velocity_max: float = Field(default=0.005, ge=0.0, description="Per-axis speed bound, fraction per frame")
    jitter: float = Field(default=0.0003, ge=0.0)
    min_size: float = Field(default=0.12, gt=0.0, lt=1.0)
    max_size: float = Field(default=0.25, gt=0.0, lt=1.0)
    occluder_events: int = Field(default=1, ge=0)
    occluder_duration: int = Field(default=3, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _check_ranges(self) -> "SynthConfig":
        if self.min_objects > self.max_objects:
            raise ValueError("min_objects must not exceed max_objects")
        if self.min_size > self.max_size:
            raise ValueError("min_size must not exceed max_size")
        return self


class PathsConfig(BaseModel):
    """Filesystem locations."""

    model_config = {"extra": "forbid"}

    data_dir: str = "data/synth"
    output_dir: str = "output"
    checkpoint: str | None = None


class RunConfig(BaseModel):
    """Complete configuration of one CLI run."""

    model_config = {"extra": "forbid"}

    model: ModelConfig = Field(default_factory=ModelConfig)
    loss: LossConfig = Field(default_factory=LossConfig)
    schedule: TmpSchedule = Field(default_factory=TmpSchedule)
    assoc: AssocConfig = Field(default_factory=AssocConfig)
    displacement: DisplacementNorm = Field(default_factory=DisplacementNorm)
    synth: SynthConfig = Field(default_factory=SynthConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)
    seed: int = 0
    eval_iou: float = Field(default=0.5, gt=0.0, lt=1.0)
    workers: int = Field(default=2, ge=1)


def validate_run_config(data: dict[str, Any]) -> RunConfig:
    """Validate a raw mapping, converting pydantic failures into ``ConfigError``."""
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(
            f"Invalid run configuration: {e.error_count()} error(s)",
            {"errors": [{"loc": list(err["loc"]), "msg": err["msg"]} for err in e.errors()]},
        ) from e


def load_run_config(path: str | Path | None) -> RunConfig:
    """Load a JSON run config; ``None`` yields the defaults."""
    if path is None:
        return RunConfig()
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"Config file not found: {config_path}")
    try:
        data = json.loads(config_path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {config_path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {config_path} must contain a JSON object")
    return validate_run_config(data)


def apply_overrides(
    config: RunConfig,
    seed: int | None = None,
    no_tmp: bool = False,
    mode: str | None = None,
    embedding: str | None = None,
    out: str | None = None,
    data_dir: str | None = None,
    checkpoint: str | None = None,
) -> RunConfig:
    """Return a re-validated copy of ``config`` with CLI flag overrides applied."""
    data = config.model_dump(mode="json")
    if seed is not None:
        data["seed"] = seed
        data["synth"]["seed"] = seed
    if no_tmp:
        data["schedule"]["use_tmp"] = False
    if mode is not None:
        data["model"]["pipeline"]["token_mode"] = mode
    if embedding is not None:
        data["model"]["pipeline"]["embedding_mode"] = embedding
    if out is not None:
        data["paths"]["output_dir"] = out
    if data_dir is not None:
        data["paths"]["data_dir"] = data_dir
    if checkpoint is not None:
        data["paths"]["checkpoint"] = checkpoint
    return validate_run_config(data)
