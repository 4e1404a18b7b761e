import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any

from src.storage.interface import StorageInterface

logger = logging.getLogger(__name__)


class LocalStorage(StorageInterface):
    """Local file system implementation of storage interface.

    Files are written to a temporary sibling and moved into place, so readers
    never observe a partially written artifact.
    """

    def __init__(self, base_path: str | Path) -> None:
        self.base_path = Path(base_path)
        self._ensure_directories()

    def _ensure_directories(self) -> None:
        """Ensure the base directory exists and is writable."""
        self.base_path.mkdir(parents=True, exist_ok=True)

        test_file = self.base_path / ".write_test"
        try:
            test_file.touch()
            test_file.unlink()
        except OSError as e:
            raise PermissionError(f"Cannot write to output directory {self.base_path}: {e}") from e

    def path(self, key: str) -> Path:
        return self.base_path / key

    def save_file(self, key: str, content: bytes, metadata: dict[str, Any] | None = None) -> str:
        """Save a file to local storage atomically."""
        file_path = self.path(key)
        file_path.parent.mkdir(parents=True, exist_ok=True)

        fd, tmp_name = tempfile.mkstemp(dir=file_path.parent, prefix=f".{file_path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(content)
            os.replace(tmp_name, file_path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise

        if metadata:
            metadata_path = file_path.with_suffix(file_path.suffix + ".metadata.json")
            metadata_path.write_text(json.dumps(metadata, indent=2))

        logger.debug(f"Saved {len(content)} bytes to {file_path}")
        return str(file_path)

    def get_file(self, key: str) -> bytes:
        """Retrieve a file from local storage."""
        file_path = self.path(key)

        if not file_path.exists():
            raise FileNotFoundError(f"File not found: {key}")

        return file_path.read_bytes()

    def file_exists(self, key: str) -> bool:
        """Check if a file exists in local storage."""
        return self.path(key).exists()

    def delete_file(self, key: str) -> bool:
        """Delete a file from local storage."""
        file_path = self.path(key)

        if file_path.exists():
            file_path.unlink()

            metadata_path = file_path.with_suffix(file_path.suffix + ".metadata.json")
            if metadata_path.exists():
                metadata_path.unlink()

            return True

        return False
