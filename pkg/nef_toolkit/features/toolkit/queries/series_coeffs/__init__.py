from abc import ABC, abstractmethod
from typing import Optional

from pydantic import BaseModel, Field

from nef_toolkit.core.series import make_context
from nef_toolkit.errors import NefToolkitError
from nef_toolkit.infrastructure.logging import get_logger
from nef_toolkit.reduction.discrete import GENERATORS, generator_series, lagrange_family, pipeline_dps, rho_via_generator

from ...models import HandlerOutcome, TableData


COEFF_COLUMNS = ["n", "beta", "rho_cumulant", "rho_generator", "residual"]


class SeriesCoeffsQuery(BaseModel):
    """Query for the coefficients of a Lagrange generator family."""

    generator: str = Field("exp", description=f"One of {', '.join(GENERATORS)}")
    order: int = Field(20, description="Largest n", ge=1, le=200)

    class Config:
        json_schema_extra = {
            "example": {
                "generator": "geometric",
                "order": 30
            }
        }


class SeriesCoeffsResult(HandlerOutcome):
    """β and ρ by both routes, with the relative residual between the routes."""

    generator: str = ""
    max_residual: Optional[float] = None
    table: Optional[TableData] = None


class SeriesCoeffsHandler(ABC):
    """Abstract handler for generator coefficient tables."""

    @abstractmethod
    def handle(self, query: SeriesCoeffsQuery) -> SeriesCoeffsResult:
        """Handle the series coeffs query."""
        pass


class SeriesCoeffsHandlerImpl(SeriesCoeffsHandler):
    """Implementation of series coeffs handler."""

    def __init__(self):
        """Initialize the handler."""
        self.logger = get_logger(__name__)

    def handle(self, query: SeriesCoeffsQuery) -> SeriesCoeffsResult:
        """Handle the series coeffs query."""
        try:
            self.logger.debug(f"Coefficients of generator {query.generator} to order {query.order}")

            ctx = make_context(pipeline_dps(query.order))
            g = generator_series(query.generator, query.order, ctx)
            family = lagrange_family(g, query.order, label=query.generator)
            rho_generator = rho_via_generator(g, query.order)

            rows = []
            for n in range(query.order + 1):
                cumulant, generated = family.exact_rho[n], rho_generator[n]
                scale = max(abs(cumulant), abs(generated))
                rows.append({
                    "n": n,
                    "beta": float(family.exact_beta[n]),
                    "rho_cumulant": float(cumulant),
                    "rho_generator": float(generated),
                    "residual": float(abs(cumulant - generated) / scale) if scale else 0.0,
                })
            worst = max(row["residual"] for row in rows)

            self.logger.info(f"Generator {query.generator}: max relative residual {worst:.2e}")
            return SeriesCoeffsResult(
                success=True,
                generator=query.generator,
                max_residual=worst,
                table=TableData(columns=COEFF_COLUMNS, rows=rows),
            )

        except (NefToolkitError, ValueError) as e:
            error_msg = f"Failed to expand generator: {e}"
            self.logger.warning(error_msg)
            return SeriesCoeffsResult.failed(e, error_msg, generator=query.generator)

        except Exception as e:
            error_msg = f"Failed to expand generator: {str(e)}"
            self.logger.exception(error_msg)
            return SeriesCoeffsResult.failed(e, error_msg, generator=query.generator)
