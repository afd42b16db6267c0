"""
Storage abstraction for proof certificates, reports and exports.

The backend is selected by `output.backend`; certificates are written as
canonical JSON so two runs of the same configuration produce identical files.
"""

from .base import StorageInterface
from .filesystem import FilesystemStorage
from .factory import get_storage

__all__ = [
    "StorageInterface",
    "FilesystemStorage",
    "get_storage"
]
