import re
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from nef_toolkit.abstractions.storage import ArtifactReference
from nef_toolkit.errors import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION_FAILED, NefToolkitError


class HandlerOutcome(BaseModel):
    """Fields every command and query result carries."""

    success: bool = Field(..., description="Handler ran to completion")
    error: Optional[str] = Field(None, description="Error message when the handler failed")
    error_type: Optional[str] = Field(None, description="Exception class behind the error")
    exit_code: int = Field(EXIT_OK, description="Process exit code for this outcome")

    @classmethod
    def failed(cls, error: BaseException, message: str, **fields) -> 'HandlerOutcome':
        return cls(
            success=False,
            error=message,
            error_type=type(error).__name__,
            exit_code=exit_code_for(error),
            **fields
        )


class TableData(BaseModel):
    """Column-ordered table rows, ready for an artifact store."""

    columns: List[str] = Field(..., description="Column order")
    rows: List[Dict[str, float]] = Field(default_factory=list, description="One mapping per row")

    class Config:
        json_schema_extra = {
            "example": {
                "columns": ["x", "phi", "beta", "c", "rho", "alpha"],
                "rows": [
                    {"x": 1, "phi": 1.0, "beta": 0.36787944117144233, "c": 1.0, "rho": 1.0,
                     "alpha": 0.36787944117144233}
                ]
            }
        }

    def column(self, name: str) -> List[float]:
        return [row[name] for row in self.rows]


class ArtifactSet(BaseModel):
    """Artifacts written by a command."""

    table: Optional[ArtifactReference] = None
    report: Optional[ArtifactReference] = None
    details: Optional[ArtifactReference] = None

    def references(self) -> List[ArtifactReference]:
        return [ref for ref in (self.table, self.report, self.details) if ref is not None]


def exit_code_for(error: BaseException) -> int:
    """CLI exit code of an exception raised inside a handler."""
    if isinstance(error, NefToolkitError):
        return error.exit_code
    if isinstance(error, (ValueError, FileNotFoundError)):
        return EXIT_USAGE
    return EXIT_VALIDATION_FAILED


def slug(name: str) -> str:
    """Artifact-safe form of a family or generator name."""
    return re.sub(r"[^a-z0-9.\-]+", "-", name.lower()).strip("-") or "artifact"
