import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel

from nef_toolkit.abstractions.storage import ArtifactReference, ArtifactStoreBase, Payload, Row
from nef_toolkit.infrastructure.logging import get_logger


def format_value(value: Any) -> str:
    """CSV cell text; floats keep 17 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def _json_default(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"cannot serialise {type(value).__name__}")


class LocalFilesystemArtifactStore(ArtifactStoreBase):
    """Local filesystem implementation of ArtifactStoreBase."""

    provider = "local"

    def __init__(self, base_path: str = "results"):
        """Initialize the store.

        Args:
            base_path: Directory that receives every artifact
        """
        self.base_path = Path(base_path)
        self.logger = get_logger(__name__)

    def _get_full_path(self, name: str) -> Path:
        return self.base_path / name

    def _reference(self, path: Path) -> ArtifactReference:
        return ArtifactReference(provider=self.provider, reference=path.as_posix())

    @staticmethod
    def _with_suffix(name: str, suffix: str) -> str:
        return name if name.endswith(suffix) else f"{name}{suffix}"

    def save_table(self, name: str, rows: Sequence[Row], columns: Optional[Sequence[str]] = None) -> ArtifactReference:
        """Write rows as CSV with '.' decimals and a fixed column order."""
        path = self._get_full_path(self._with_suffix(name, ".csv"))
        path.parent.mkdir(parents=True, exist_ok=True)
        header = list(columns) if columns is not None else (list(rows[0].keys()) if rows else [])
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(row.get(column)) for column in header])
        self.logger.debug(f"Wrote {len(rows)} rows to {path}")
        return self._reference(path)

    def save_json(self, name: str, payload: Payload) -> ArtifactReference:
        """Write a JSON document with sorted keys."""
        path = self._get_full_path(self._with_suffix(name, ".json"))
        path.parent.mkdir(parents=True, exist_ok=True)
        document = payload.model_dump(mode="json") if isinstance(payload, BaseModel) else payload
        text = json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False, default=_json_default)
        path.write_text(text + "\n", encoding="utf-8")
        self.logger.debug(f"Wrote JSON artifact {path}")
        return self._reference(path)

    def load_table(self, name: str) -> Optional[List[Dict[str, str]]]:
        path = self._get_full_path(self._with_suffix(name, ".csv"))
        if not path.exists():
            return None
        with path.open(newline="", encoding="utf-8") as handle:
            return list(csv.DictReader(handle))

    def load_json(self, name: str) -> Optional[Any]:
        path = self._get_full_path(self._with_suffix(name, ".json"))
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def list_artifacts(self) -> List[str]:
        if not self.base_path.is_dir():
            return []
        return sorted(
            item.relative_to(self.base_path).as_posix()
            for item in self.base_path.rglob('*') if item.is_file()
        )
