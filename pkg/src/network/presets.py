"""Named encoder sizes: base/large width crossed with patch size 8/16."""
import logging

from src.config.run_config import ModelConfig
from src.utils.error_handlers import ConfigError

logger = logging.getLogger(__name__)

# name -> (layers, embed_dim, heads, patch_size)
BACKBONE_PRESETS: dict[str, tuple[int, int, int, int]] = {
    "base-8": (2, 64, 4, 8),
    "base-16": (2, 64, 4, 16),
    "large-8": (4, 96, 6, 8),
    "large-16": (4, 96, 6, 16),
}


def apply_preset(config: ModelConfig, name: str) -> ModelConfig:
    """Return a validated copy of ``config`` resized to the named backbone."""
    if name not in BACKBONE_PRESETS:
        raise ConfigError(f"unknown backbone preset '{name}'", {"known": sorted(BACKBONE_PRESETS)})
    n_layers, embed_dim, heads, patch = BACKBONE_PRESETS[name]
    data = config.model_dump(mode="json")
    data.update(layers=n_layers, heads=heads)
    data["pipeline"].update(embed_dim=embed_dim, patch_size=patch)
    try:
        resized = ModelConfig.model_validate(data)
    except ValueError as e:
        raise ConfigError(f"preset '{name}' does not fit the configured geometry: {e}") from e
    logger.debug(f"Applied backbone preset {name}")
    return resized
