"""Closed-form parameter and multiply counts of ``OneTrackNet``."""
from src.config.run_config import EmbeddingMode, ModelConfig, TokenMode
from src.network.model import HEAD_OUTPUTS


def count_parameters(config: ModelConfig) -> int:
    """Number of scalar parameters the network builds for ``config``."""
    pipe = config.pipeline
    n_d, window, patch = pipe.embed_dim, pipe.window, pipe.patch_size
    stacked = pipe.token_mode == TokenMode.STACKED

    in_channels = 3 * window if stacked else 3
    total = n_d * in_channels * patch * patch + n_d
    if pipe.embedding_mode == EmbeddingMode.CHANNEL_WISE:
        total += window * n_d
        if not stacked:
            total += pipe.num_patches * n_d
    else:
        total += pipe.num_tokens * n_d

    mlp = config.mlp_ratio * n_d
    per_block = 4 * n_d + 4 * (n_d * n_d + n_d) + (n_d * mlp + mlp) + (mlp * n_d + n_d)
    total += config.layers * per_block

    block_cells = config.block_size**2
    maps_per_token = window * block_cells if stacked else block_cells
    total += n_d * maps_per_token + maps_per_token

    hidden = config.head_hidden
    for out_dim, _ in HEAD_OUTPUTS.values():
        total += window * hidden + hidden
        total += hidden * hidden + hidden
        total += hidden * hidden * 9 + hidden
        total += out_dim * hidden * 9 + out_dim
    return total


def encoder_multiplies(config: ModelConfig) -> int:
    """Multiplications in the encoder blocks; depends on W only through the token count."""
    n_d = config.pipeline.embed_dim
    tokens = config.pipeline.num_tokens
    mlp = config.mlp_ratio * n_d
    projections = 4 * tokens * n_d * n_d
    attention = 2 * tokens * tokens * n_d
    feed_forward = 2 * tokens * n_d * mlp
    return config.layers * (projections + attention + feed_forward)


def forward_multiplies(config: ModelConfig) -> dict[str, int]:
    """Multiplications per forward pass, by stage, plus ``total``."""
    pipe = config.pipeline
    n_d, window, patch = pipe.embed_dim, pipe.window, pipe.patch_size
    side = config.grid_size
    block_cells = config.block_size**2
    hidden = config.head_hidden

    # stacked and streamed both touch every pixel of every frame once per output channel
    patch_projection = window * pipe.num_patches * n_d * 3 * patch * patch
    maps_per_token = window * block_cells if pipe.token_mode == TokenMode.STACKED else block_cells
    projection = pipe.num_tokens * n_d * maps_per_token
    heads = 0
    for out_dim, _ in HEAD_OUTPUTS.values():
        heads += side * side * (window * hidden + hidden * hidden)
        heads += side * side * 9 * hidden * (hidden + out_dim)

    stages = {
        "patch_projection": patch_projection,
        "encoder": encoder_multiplies(config),
        "map_projection": projection,
        "heads": heads,
    }
    stages["total"] = sum(stages.values())
    return stages
