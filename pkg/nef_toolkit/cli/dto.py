from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from nef_toolkit.latent import ExperimentConfig


class OutputFormat(str, Enum):
    """Table artifact format."""
    CSV = "csv"
    JSON = "json"


class SimulateOverrides(BaseModel):
    """Flags given to ``simulate``; unset flags keep the config file or default value."""

    family: Optional[str] = None
    n: Optional[int] = None
    r: Optional[int] = None
    k_ladder: Optional[List[int]] = None
    replicates: Optional[int] = None
    seed: Optional[int] = None
    output: Optional[str] = None

    class Config:
        json_schema_extra = {
            "example": {
                "family": "normal",
                "n": 10,
                "r": 2,
                "k_ladder": [200, 2000],
                "replicates": 5,
                "seed": 7,
                "output": None
            }
        }

    def apply(self, config_file: Optional[Path]) -> ExperimentConfig:
        """Config file values, then flags, validated together."""
        values: Dict[str, Any] = {}
        if config_file is not None:
            values.update(ExperimentConfig.from_file(config_file).model_dump())
        values.update(self.model_dump(exclude_none=True))
        return ExperimentConfig.model_validate(values)


class CommandReport(BaseModel):
    """What a CLI action prints to stdout."""

    title: str
    lines: List[Tuple[str, str]] = Field(default_factory=list)
    artifacts: List[str] = Field(default_factory=list)
    exit_code: int = 0


def parse_k_ladder(text: Optional[str]) -> Optional[List[int]]:
    if text is None:
        return None
    return [int(part) for part in text.split(",") if part.strip()]


def parse_grid(spec: str) -> Optional[List[Tuple[float, float]]]:
    """``default`` or ``;``-separated complex literals such as ``0.3+1j;-2+0.5j``."""
    if spec.strip().lower() == "default":
        return None
    points = []
    for literal in spec.split(";"):
        literal = literal.strip().replace(" ", "")
        if not literal:
            continue
        try:
            value = complex(literal)
        except ValueError:
            raise ValueError(f"grid point {literal!r} is not a complex number")
        points.append((value.real, value.imag))
    if not points:
        raise ValueError("grid is empty")
    return points
