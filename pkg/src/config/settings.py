import logging
import os

from dotenv import load_dotenv

load_dotenv()


class Settings:
    """Process-level settings read from the environment (and an optional .env file)."""

    @property
    def log_level(self) -> int:
        """Logging verbosity: DEBUG, INFO, WARNING or ERROR"""
        name = os.getenv("LOG_LEVEL", "INFO").upper()
        level = logging.getLevelName(name)
        return level if isinstance(level, int) else logging.INFO

    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


settings = Settings()
