import json
from abc import ABC, abstractmethod
from typing import Any


class StorageInterface(ABC):
    """Abstract interface for run artifacts: datasets, checkpoints, results and reports."""

    @abstractmethod
    def save_file(self, key: str, content: bytes, metadata: dict[str, Any] | None = None) -> str:
        """
        Save a file to storage.

        Args:
            key: Relative path of the artifact
            content: File content as bytes
            metadata: Optional metadata to store next to the file

        Returns:
            Storage path
        """
        pass

    @abstractmethod
    def get_file(self, key: str) -> bytes:
        """
        Retrieve a file from storage.

        Args:
            key: Relative path of the artifact

        Returns:
            File content as bytes
        """
        pass

    @abstractmethod
    def file_exists(self, key: str) -> bool:
        """Check if a file exists in storage."""
        pass

    @abstractmethod
    def delete_file(self, key: str) -> bool:
        """
        Delete a file from storage.

        Returns:
            True if file was deleted, False otherwise
        """
        pass

    def save_text(self, key: str, text: str) -> str:
        return self.save_file(key, text.encode("utf-8"))

    def save_json(self, key: str, data: Any) -> str:
        return self.save_file(key, json.dumps(data, indent=2, sort_keys=True).encode("utf-8"))

    def load_json(self, key: str) -> Any:
        return json.loads(self.get_file(key).decode("utf-8"))
