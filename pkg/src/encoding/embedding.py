"""Channel-wise and positional token encodings."""
from collections.abc import Sequence
from dataclasses import dataclass

from src.config.run_config import EmbeddingMode, PipelineConfig, TokenMode
from src.numerics.tensor import Tensor, add_all, concat
from src.utils.error_handlers import ConfigError


@dataclass
class ChannelEmbeddings:
    """One trainable vector per frame of the window, shape [W, n_d]."""

    table: Tensor

    @classmethod
    def zeros(cls, window: int, embed_dim: int) -> "ChannelEmbeddings":
        return cls(Tensor.zeros((window, embed_dim), requires_grad=True))

    def check(self, cfg: PipelineConfig) -> None:
        if self.table.shape != (cfg.window, cfg.embed_dim):
            raise ConfigError(
                f"channel embeddings must be [{cfg.window}, {cfg.embed_dim}], got {list(self.table.shape)}"
            )


def apply_embedding(
    tokens: Tensor | Sequence[Tensor],
    cfg: PipelineConfig,
    channel: ChannelEmbeddings | None = None,
    positions: Tensor | None = None,
) -> Tensor:
    """Add temporal and/or spatial identity to projected tokens.

    ``tokens`` is either one [N, n_d] tensor or, in stacked channel-wise mode,
    the W per-frame partial projections; each partial then receives its own
    ``E[w]`` before they are summed. ``positions`` is [N_p, n_d] in streamed
    channel-wise mode and [N, n_d] in positional mode.
    """
    if cfg.embedding_mode == EmbeddingMode.POSITIONAL:
        merged = _merge(tokens)
        if positions is None or positions.shape != merged.shape:
            raise ConfigError(
                "positional mode needs a position table shaped like the tokens",
                {"tokens": list(merged.shape), "positions": None if positions is None else list(positions.shape)},
            )
        return merged + positions

    if channel is None:
        raise ConfigError("channel_wise mode needs channel embeddings")
    channel.check(cfg)
    table = channel.table

    if cfg.token_mode == TokenMode.STACKED:
        if isinstance(tokens, Tensor):
            return tokens + table.sum(axis=0)
        if len(tokens) != cfg.window:
            raise ConfigError(f"expected {cfg.window} partial projections, got {len(tokens)}")
        return add_all(part + table[w] for w, part in enumerate(tokens))

    merged = _merge(tokens)
    per_frame = cfg.num_patches
    if merged.shape[0] != cfg.window * per_frame:
        raise ConfigError(f"streamed mode expects {cfg.window * per_frame} tokens, got {merged.shape[0]}")
    frames = [merged[w * per_frame : (w + 1) * per_frame] + table[w] for w in range(cfg.window)]
    if positions is not None:
        if positions.shape != (per_frame, cfg.embed_dim):
            raise ConfigError(f"spatial positions must be [{per_frame}, {cfg.embed_dim}]")
        frames = [frame + positions for frame in frames]
    return concat(frames, axis=0)


def _merge(tokens: Tensor | Sequence[Tensor]) -> Tensor:
    return tokens if isinstance(tokens, Tensor) else add_all(tokens)
