"""
Filesystem storage implementation.
"""

import json
import logging
from pathlib import Path
from typing import Any, List

from models import dumps

from .base import StorageInterface

logger = logging.getLogger(__name__)


class FilesystemStorage(StorageInterface):
    """
    Filesystem-based storage implementation.

    Stores every artefact below one output directory.
    """

    def __init__(self, base_path: str = "proofs"):
        """
        Initialize filesystem storage.

        Args:
            base_path: Output directory for certificates and exports
        """
        self.base_path = Path(base_path)
        self.base_path.mkdir(parents=True, exist_ok=True)

    def path_for(self, name: str) -> Path:
        return self.base_path / name

    def save_json(self, data: Any, name: str) -> Path:
        """Write canonical JSON (sorted keys, two-space indent, no NaN)."""
        return self.save_text(dumps(data), name)

    def load_json(self, name: str) -> Any:
        file_path = self.path_for(name)
        if not file_path.exists():
            raise FileNotFoundError(f"File not found: {name}")
        return json.loads(file_path.read_text())

    def save_text(self, text: str, name: str) -> Path:
        file_path = self.path_for(name)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        file_path.write_text(text)
        logger.debug("wrote %s", file_path)
        return file_path

    def exists(self, name: str) -> bool:
        return self.path_for(name).exists()

    def delete(self, name: str) -> bool:
        file_path = self.path_for(name)

        if not file_path.exists():
            return False

        try:
            file_path.unlink()
            return True
        except OSError:
            return False

    def list_files(self, prefix: str = "") -> List[str]:
        """List files below the output directory with optional prefix filter."""
        search_path = self.base_path / prefix if prefix else self.base_path

        if not search_path.exists():
            return []

        files = []
        for file_path in sorted(search_path.rglob("*")):
            if file_path.is_file():
                files.append(str(file_path.relative_to(self.base_path)))

        return files
