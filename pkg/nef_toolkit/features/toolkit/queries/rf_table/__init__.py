from abc import ABC, abstractmethod
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from nef_toolkit.errors import NefToolkitError, NotInfinitelyDivisible
from nef_toolkit.families import get_family, is_discrete, parse_family_name
from nef_toolkit.infrastructure.logging import get_logger
from nef_toolkit.reduction.continuous import qvf_rf, qvf_spec_for
from nef_toolkit.reduction.discrete import DiscreteIdFamily, build_family
from nef_toolkit.reduction.functions import GridRatioRf
from nef_toolkit.reduction.validation import build_reduction_function

from ...models import HandlerOutcome, TableData


PIPELINE_COLUMNS = ["beta", "c", "rho", "alpha"]


class RfTableQuery(BaseModel):
    """Query for a reduction function table."""

    family: str = Field(..., description="Registry name")
    n_max: int = Field(10, description="Largest atom for families on ℕ", ge=0)
    x_min: Optional[float] = Field(None, description="Grid start for continuous families")
    x_max: float = Field(5.0, description="Grid end for continuous families")
    points: int = Field(21, description="Grid size for continuous families", ge=2)

    class Config:
        json_schema_extra = {
            "example": {
                "family": "abel",
                "n_max": 10,
                "x_min": None,
                "x_max": 5.0,
                "points": 21
            }
        }

    @model_validator(mode="after")
    def _grid(self) -> 'RfTableQuery':
        if self.x_min is not None and not self.x_min < self.x_max:
            raise ValueError(f"x_min = {self.x_min} must be below x_max = {self.x_max}")
        return self


class RfTableResult(HandlerOutcome):
    """Result of a reduction function table query."""

    family: str = ""
    rf_kind: Optional[str] = None
    table: Optional[TableData] = None


class RfTableHandler(ABC):
    """Abstract handler for reduction function tables."""

    @abstractmethod
    def handle(self, query: RfTableQuery) -> RfTableResult:
        """Handle the rf table query."""
        pass


class RfTableHandlerImpl(RfTableHandler):
    """Implementation of rf table handler."""

    def __init__(self):
        """Initialize the handler."""
        self.logger = get_logger(__name__)

    def _atom_table(self, query: RfTableQuery) -> RfTableResult:
        nef = get_family(query.family)
        base, params = parse_family_name(query.family)
        spec = qvf_spec_for(base, params)
        closed = qvf_rf(spec) if spec is not None else None

        pipeline: Optional[DiscreteIdFamily] = None
        try:
            pipeline = build_family(nef, max(query.n_max, 1))
        except NotInfinitelyDivisible as e:
            if closed is None:
                raise
            self.logger.info(f"{nef.label} has no cumulant pipeline: {e}")

        rows: List[Dict[str, float]] = []
        if pipeline is not None:
            for row in pipeline.rows()[:query.n_max + 1]:
                entry = {"x": row["n"], "phi": float(closed(row["n"])) if closed else row["phi"]}
                entry.update({column: row[column] for column in PIPELINE_COLUMNS})
                if closed is not None:
                    entry["phi_pipeline"] = row["phi"]
                rows.append(entry)
            columns = ["x", "phi"] + PIPELINE_COLUMNS + (["phi_pipeline"] if closed else [])
        else:
            weights = nef.weights(query.n_max)
            rows = [
                {"x": n, "phi": float(closed(n)), "beta": float(weights[n])}
                for n in range(query.n_max + 1) if weights[n] > 0
            ]
            columns = ["x", "phi", "beta"]

        kind = closed.kind.value if closed else "atom-table"
        return RfTableResult(success=True, family=nef.label, rf_kind=kind, table=TableData(columns=columns, rows=rows))

    def _grid_table(self, query: RfTableQuery) -> RfTableResult:
        nef, rf = build_reduction_function(query.family)
        lower = nef.mean_domain[0]
        x_min = query.x_min if query.x_min is not None else (-query.x_max if lower == -np.inf else query.x_max / (query.points - 1))
        x_max = query.x_max
        if isinstance(rf, GridRatioRf):
            x_max = min(x_max, float(rf.grid[-1]))
        grid = np.linspace(x_min, x_max, query.points)
        values = rf(grid)
        rows = [{"x": float(x), "phi": float(value)} for x, value in zip(grid, values)]
        return RfTableResult(
            success=True,
            family=nef.label,
            rf_kind=rf.kind.value,
            table=TableData(columns=["x", "phi"], rows=rows),
        )

    def handle(self, query: RfTableQuery) -> RfTableResult:
        """Handle the rf table query."""
        try:
            self.logger.debug(f"Tabulating φ for {query.family}")

            result = self._atom_table(query) if is_discrete(query.family) else self._grid_table(query)

            self.logger.info(f"Tabulated φ for {result.family}: {len(result.table.rows)} rows")
            return result

        except (NefToolkitError, ValueError) as e:
            error_msg = f"Failed to tabulate φ: {e}"
            self.logger.warning(error_msg)
            return RfTableResult.failed(e, error_msg, family=query.family)

        except Exception as e:
            error_msg = f"Failed to tabulate φ: {str(e)}"
            self.logger.exception(error_msg)
            return RfTableResult.failed(e, error_msg, family=query.family)
