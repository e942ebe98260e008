from typing import Any, Dict, List, Optional, Sequence

from nef_toolkit.abstractions.storage import ArtifactReference, ArtifactStoreBase, Payload, Row
from nef_toolkit.infrastructure.logging import get_logger
from nef_toolkit.infrastructure.storage.local_filesystem import LocalFilesystemArtifactStore
from nef_toolkit.settings.app_settings import settings


class ArtifactStorageService:
    """Writes result tables and reports through a configurable store."""

    def __init__(self, store: Optional[ArtifactStoreBase] = None):
        """Initialize the artifact storage service.

        Args:
            store: Optional store instance. If None, a local store rooted at
                NEF_TOOLKIT_OUTPUT_DIR is created.
        """
        self.logger = get_logger(__name__)
        self._store = store or LocalFilesystemArtifactStore(base_path=settings.output_dir)
        self.logger.debug(f"Initialized ArtifactStorageService with store: {type(self._store).__name__}")

    @classmethod
    def create_from_settings(cls) -> 'ArtifactStorageService':
        return cls()

    @classmethod
    def at(cls, base_path: str) -> 'ArtifactStorageService':
        """Service writing under ``base_path`` instead of the configured directory."""
        return cls(LocalFilesystemArtifactStore(base_path=base_path))

    @property
    def store(self) -> ArtifactStoreBase:
        return self._store

    def write_table(self, name: str, rows: Sequence[Row], columns: Optional[Sequence[str]] = None) -> ArtifactReference:
        reference = self._store.save_table(name, rows, columns)
        self.logger.info(f"Saved table {reference} ({len(rows)} rows)")
        return reference

    def write_json(self, name: str, payload: Payload) -> ArtifactReference:
        reference = self._store.save_json(name, payload)
        self.logger.info(f"Saved report {reference}")
        return reference

    def read_table(self, name: str) -> Optional[List[Dict[str, str]]]:
        return self._store.load_table(name)

    def read_json(self, name: str) -> Optional[Any]:
        return self._store.load_json(name)

    def list_artifacts(self) -> List[str]:
        return self._store.list_artifacts()


# Global service instance - lazy loaded
_storage_service: Optional[ArtifactStorageService] = None


def get_storage_service() -> ArtifactStorageService:
    """Get the global storage service instance."""
    global _storage_service

    if _storage_service is None:
        _storage_service = ArtifactStorageService.create_from_settings()

    return _storage_service


def reset_storage_service() -> None:
    """Reset the global storage service instance (useful for testing)."""
    global _storage_service
    _storage_service = None
