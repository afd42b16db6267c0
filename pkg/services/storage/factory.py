"""
Storage factory for creating storage instances based on configuration.
"""

from typing import Optional

from dependencies.config import PipelineConfig
from services.errors import ConfigError

from .base import StorageInterface
from .filesystem import FilesystemStorage


def get_storage(config: PipelineConfig, out_dir: Optional[str] = None) -> StorageInterface:
    """
    Get storage instance based on pipeline configuration.

    Settings:
    - output.backend: storage backend (only "filesystem" is provided)
    - output.out_dir: base directory (overridden by out_dir, e.g. from --out)

    Returns:
        StorageInterface: Configured storage instance
    """
    backend = config.output.backend.lower()

    if backend == "filesystem":
        return _create_filesystem_storage(out_dir or config.output.out_dir)
    raise ConfigError(f"unknown storage backend {config.output.backend!r}")


def _create_filesystem_storage(out_dir: str) -> FilesystemStorage:
    """Create filesystem storage instance."""
    return FilesystemStorage(base_path=out_dir)
