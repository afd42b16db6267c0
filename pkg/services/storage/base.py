"""
Abstract base class for certificate storage implementations.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, List


class StorageInterface(ABC):
    """
    Abstract interface for proof artefact storage.

    Certificates, reports and exports are addressed by relative names
    ("report.json", "exports/orbit.csv"). Backends decide where the bytes
    live; the pipeline only ever talks to this interface.
    """

    @abstractmethod
    def save_json(self, data: Any, name: str) -> Path:
        """
        Write a JSON document in canonical form.

        Args:
            data: JSON-compatible data (dicts, lists, numbers, strings)
            name: Relative name of the document

        Returns:
            Location of the written document
        """
        pass

    @abstractmethod
    def load_json(self, name: str) -> Any:
        """
        Read a JSON document.

        Raises:
            FileNotFoundError: If the document doesn't exist
        """
        pass

    @abstractmethod
    def save_text(self, text: str, name: str) -> Path:
        """Write a text artefact (TOML, CSV) and return its location."""
        pass

    @abstractmethod
    def exists(self, name: str) -> bool:
        pass

    @abstractmethod
    def delete(self, name: str) -> bool:
        """
        Delete an artefact.

        Returns:
            True if it was deleted, False if it didn't exist
        """
        pass

    @abstractmethod
    def list_files(self, prefix: str = "") -> List[str]:
        """Relative names of stored artefacts, optionally under a prefix."""
        pass

    @abstractmethod
    def path_for(self, name: str) -> Path:
        """Location an artefact is (or would be) stored at."""
        pass
