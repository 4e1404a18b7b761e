"""Encoder-only transformer with map projection and three grid heads."""
import json
import logging
from collections.abc import Iterable
from typing import Literal

import numpy as np

from src.config.run_config import EmbeddingMode, ModelConfig, TokenMode
from src.encoding.embedding import ChannelEmbeddings, apply_embedding
from src.encoding.frames import FrameWindow, frame_partial_projections, patchify_project, stack_window
from src.models.outputs import ModelOutput
from src.network import layers
from src.network.layers import Params
from src.numerics.checkpoint import decode_weights, encode_weights
from src.numerics.tensor import Tensor, concat, pointwise
from src.utils.error_handlers import CheckpointError, ConfigError

logger = logging.getLogger(__name__)

HeadKind = Literal["heatmap", "dims", "disp"]

HEAD_OUTPUTS: dict[str, tuple[int, Literal["sigmoid", "tanh"]]] = {
    "heatmap": (1, "sigmoid"),
    "dims": (2, "sigmoid"),
    "disp": (2, "tanh"),
}


class OneTrackNet:
    """Window-in, current-frame-grids-out tracking network.

    Parameter names are grouped by prefix: ``embed.*`` (patch projection and
    token encodings), ``encoder.*``, ``project.*`` (token-to-map projection)
    and ``heads.<kind>.*``. Freezing works on these prefixes.
    """

    def __init__(self, config: ModelConfig, seed: int = 0):
        self.config = config
        self.params: Params = {}
        self.frozen: set[str] = set()
        self._build(np.random.default_rng(seed))

    # -- construction ----------------------------------------------------------

    def _build(self, rng: np.random.Generator) -> None:
        cfg = self.config
        pipe = cfg.pipeline
        n_d, patch, window = pipe.embed_dim, pipe.patch_size, pipe.window
        in_channels = 3 * window if pipe.token_mode == TokenMode.STACKED else 3

        self.params["embed.proj"] = Tensor.param(layers.truncated_normal((n_d, in_channels, patch, patch), rng))
        self.params["embed.bias"] = Tensor.param(np.zeros(n_d))
        if pipe.embedding_mode == EmbeddingMode.CHANNEL_WISE:
            self.params["embed.channel"] = Tensor.param(layers.truncated_normal((window, n_d), rng))
            if pipe.token_mode == TokenMode.STREAMED:
                self.params["embed.spatial"] = Tensor.param(layers.truncated_normal((pipe.num_patches, n_d), rng))
        else:
            self.params["embed.position"] = Tensor.param(layers.truncated_normal((pipe.num_tokens, n_d), rng))

        for i in range(cfg.layers):
            layers.init_encoder_block(self.params, f"encoder.{i}", n_d, cfg.mlp_ratio, rng)

        block = cfg.block_size
        maps_per_token = window * block * block if pipe.token_mode == TokenMode.STACKED else block * block
        layers.init_linear(self.params, "project", n_d, maps_per_token, rng)

        hidden = cfg.head_hidden
        for kind, (out_dim, _) in HEAD_OUTPUTS.items():
            prefix = f"heads.{kind}"
            layers.init_linear(self.params, f"{prefix}.fc1", window, hidden, rng)
            layers.init_linear(self.params, f"{prefix}.fc2", hidden, hidden, rng)
            layers.init_conv(self.params, f"{prefix}.conv1", hidden, hidden, 3, rng)
            layers.init_conv(self.params, f"{prefix}.conv2", hidden, out_dim, 3, rng, zero=True)

    @property
    def num_parameters(self) -> int:
        return sum(p.size for p in self.params.values())

    # -- forward path ----------------------------------------------------------

    def embed(self, window: FrameWindow) -> Tensor:
        """Stack, patchify, project and encode a window into the token sequence."""
        pipe = self.config.pipeline
        window.check(pipe)
        proj, bias = self.params["embed.proj"], self.params["embed.bias"]
        channel = ChannelEmbeddings(self.params["embed.channel"]) if "embed.channel" in self.params else None

        if pipe.token_mode == TokenMode.STACKED:
            stacked = stack_window(window)
            if pipe.embedding_mode == EmbeddingMode.CHANNEL_WISE:
                partials = frame_partial_projections(stacked, proj, pipe.window)
                tokens = apply_embedding(partials, pipe, channel=channel)
            else:
                tokens = apply_embedding(patchify_project(stacked, proj), pipe, positions=self.params["embed.position"])
            return tokens + bias

        per_frame = concat([patchify_project(Tensor(frame), proj) for frame in window.frames], axis=0)
        if pipe.embedding_mode == EmbeddingMode.CHANNEL_WISE:
            tokens = apply_embedding(per_frame, pipe, channel=channel, positions=self.params["embed.spatial"])
        else:
            tokens = apply_embedding(per_frame, pipe, positions=self.params["embed.position"])
        return tokens + bias

    def encode(self, tokens: Tensor) -> Tensor:
        """Run the encoder blocks; sequence length is preserved and no class token is added."""
        for i in range(self.config.layers):
            tokens = layers.encoder_block(tokens, self.params, f"encoder.{i}", self.config.heads)
        return tokens

    def project_maps(self, features: Tensor) -> Tensor:
        """Project encoder features [N, n_d] to W per-frame maps [W, R, R]."""
        pipe = self.config.pipeline
        grid, block, window = pipe.grid_side, self.config.block_size, pipe.window
        side = self.config.grid_size
        if features.ndim != 2 or features.shape != (pipe.num_tokens, pipe.embed_dim):
            raise ConfigError(
                f"features must be [{pipe.num_tokens}, {pipe.embed_dim}], got {list(features.shape)}"
            )
        cells = layers.linear(features, self.params, "project")
        if pipe.token_mode == TokenMode.STACKED:
            # token (gi, gj) owns a block x block patch of every frame's map
            maps = cells.reshape(grid, grid, window, block, block).permute(2, 0, 3, 1, 4)
        else:
            maps = cells.reshape(window, grid, grid, block, block).permute(0, 1, 3, 2, 4)
        return maps.reshape(window, side, side)

    def run_head(self, kind: HeadKind, maps: Tensor) -> Tensor:
        """Two per-cell fully connected layers then two 3x3 convolutions: [W,R,R] -> [OutDim,R,R]."""
        if kind not in HEAD_OUTPUTS:
            raise ConfigError(f"unknown head '{kind}'")
        out_dim, activation = HEAD_OUTPUTS[kind]
        window, side, _ = maps.shape
        prefix = f"heads.{kind}"
        hidden = self.config.head_hidden

        cells = maps.reshape(window, side * side).T
        cells = layers.linear(cells, self.params, f"{prefix}.fc1").relu()
        cells = layers.linear(cells, self.params, f"{prefix}.fc2").relu()
        grid = cells.T.reshape(hidden, side, side)
        grid = layers.conv(grid, self.params, f"{prefix}.conv1").relu()
        logits = layers.conv(grid, self.params, f"{prefix}.conv2")
        assert logits.shape == (out_dim, side, side)
        return pointwise(activation, logits)

    def forward(self, window: FrameWindow) -> ModelOutput:
        maps = self.project_maps(self.encode(self.embed(window)))
        return ModelOutput(
            heatmap=self.run_head("heatmap", maps),
            dims=self.run_head("dims", maps),
            disp=self.run_head("disp", maps),
        )

    __call__ = forward

    # -- freezing --------------------------------------------------------------

    def freeze(self, prefixes: Iterable[str]) -> None:
        """Mark every parameter under the given prefixes as frozen."""
        prefixes = tuple(prefixes)
        self.frozen = {name for name in self.params if name.startswith(prefixes)}

    def unfreeze_all(self) -> None:
        self.frozen = set()

    def trainable(self) -> dict[str, Tensor]:
        return {name: p for name, p in self.params.items() if name not in self.frozen}

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    # -- checkpoints -----------------------------------------------------------

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.params.items()}

    def load_state_dict(self, arrays: dict[str, np.ndarray]) -> None:
        """Copy arrays into the parameters; any missing name or shape mismatch is a ``CheckpointError``."""
        for name, param in self.params.items():
            if name not in arrays:
                raise CheckpointError(f"checkpoint has no parameter '{name}'", expected_shape=param.shape)
            if arrays[name].shape != param.shape:
                raise CheckpointError(
                    f"parameter '{name}' has shape {list(arrays[name].shape)}, model expects {list(param.shape)}",
                    expected_shape=param.shape,
                    found_shape=arrays[name].shape,
                )
        unexpected = sorted(set(arrays) - set(self.params))
        if unexpected:
            raise CheckpointError(f"checkpoint has unexpected parameters: {unexpected}")
        for name, param in self.params.items():
            param.data = np.array(arrays[name], dtype=np.float64)

    def to_bytes(self) -> bytes:
        return encode_weights(self.state_dict(), self.config.model_dump_json())

    @classmethod
    def from_bytes(cls, blob: bytes, config: ModelConfig | None = None) -> "OneTrackNet":
        """Rebuild a network from a checkpoint.

        With ``config`` given, the checkpoint must fit it; otherwise the config
        echoed into the checkpoint is used.
        """
        config_json, arrays = decode_weights(blob)
        if config is None:
            try:
                config = ModelConfig.model_validate(json.loads(config_json))
            except ValueError as e:
                raise CheckpointError(f"checkpoint config echo is invalid: {e}") from e
        model = cls(config)
        model.load_state_dict(arrays)
        logger.info(f"Loaded checkpoint with {len(arrays)} arrays, {model.num_parameters} parameters")
        return model
