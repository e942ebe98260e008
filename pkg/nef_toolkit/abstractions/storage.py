from abc import ABC, abstractmethod
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

from pydantic import BaseModel, Field


Row = Mapping[str, Any]
Payload = Union[BaseModel, Mapping[str, Any], Sequence[Any]]


class ArtifactStoreBase(ABC):
    """Abstract base class for result artifact stores."""

    @abstractmethod
    def save_table(self, name: str, rows: Sequence[Row], columns: Optional[Sequence[str]] = None) -> 'ArtifactReference':
        """Write a table of rows as CSV.

        Args:
            name: Artifact name; a ``.csv`` suffix is added when missing
            rows: One mapping per row
            columns: Column order; defaults to the keys of the first row

        Returns:
            Reference to the written artifact
        """
        pass

    @abstractmethod
    def save_json(self, name: str, payload: Payload) -> 'ArtifactReference':
        """Write a JSON document.

        Args:
            name: Artifact name; a ``.json`` suffix is added when missing
            payload: A pydantic model, a mapping or a list

        Returns:
            Reference to the written artifact
        """
        pass

    @abstractmethod
    def load_table(self, name: str) -> Optional[List[Dict[str, str]]]:
        """Read a CSV artifact back.

        Args:
            name: Artifact name

        Returns:
            Rows as string mappings if found, None otherwise
        """
        pass

    @abstractmethod
    def load_json(self, name: str) -> Optional[Any]:
        """Read a JSON artifact back.

        Args:
            name: Artifact name

        Returns:
            Decoded document if found, None otherwise
        """
        pass

    @abstractmethod
    def list_artifacts(self) -> List[str]:
        """List every artifact in the store.

        Returns:
            Artifact names relative to the store root, sorted
        """
        pass


class ArtifactReference(BaseModel):
    """Reference to an artifact written by a store."""

    provider: str = Field(..., description="Store name (e.g., 'local')")
    reference: str = Field(..., description="Store-specific artifact path")

    class Config:
        json_schema_extra = {
            "example": {
                "provider": "local",
                "reference": "results/conjecture-n25.csv"
            }
        }

    def __str__(self) -> str:
        return f"{self.provider}://{self.reference}"
