from src.storage.interface import StorageInterface
from src.storage.local_storage import LocalStorage

__all__ = ["LocalStorage", "StorageInterface"]
