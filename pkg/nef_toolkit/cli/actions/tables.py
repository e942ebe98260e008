from typing import Optional, Union

from nef_toolkit.errors import EXIT_OK
from nef_toolkit.features.toolkit.models import TableData, slug
from nef_toolkit.features.toolkit.queries.rf_table import RfTableResult
from nef_toolkit.features.toolkit.queries.series_coeffs import SeriesCoeffsResult
from nef_toolkit.features.toolkit.service import ToolkitService
from nef_toolkit.infrastructure.logging import get_logger
from ..dto import CommandReport, OutputFormat


logger = get_logger(__name__)


def _write(service: ToolkitService, name: str, table: TableData, output_format: OutputFormat) -> str:
    storage = service.storage_service
    if output_format is OutputFormat.JSON:
        return str(storage.write_json(name, table))
    return str(storage.write_table(name, table.rows, table.columns))


def _failure(title: str, result: Union[RfTableResult, SeriesCoeffsResult]) -> CommandReport:
    return CommandReport(
        title=title,
        lines=[("error", f"{result.error_type}: {result.error}")],
        exit_code=result.exit_code,
    )


def rf_table_action(
    service: ToolkitService,
    family: str,
    n_max: int,
    x_min: Optional[float],
    x_max: float,
    points: int,
    output: Optional[str],
    output_format: OutputFormat
) -> CommandReport:
    """
    Action to tabulate a family's reduction function.

    Families on ℕ get φ at 0..n_max with the β, c, ρ, α pipeline columns;
    continuous families get φ on a uniform x grid.

    Args:
        service: Toolkit service instance
        family: Registry name
        n_max: Largest atom for families on ℕ
        x_min: Grid start for continuous families
        x_max: Grid end for continuous families
        points: Grid size for continuous families
        output: Artifact name
        output_format: csv or json

    Returns:
        CommandReport for stdout
    """
    logger.info(f"rf-table for {family}")
    result = service.rf_table(family, n_max=n_max, x_min=x_min, x_max=x_max, points=points)
    if not result.success:
        return _failure(f"rf-table {family}", result)

    reference = _write(service, output or f"rf-{slug(result.family)}", result.table, output_format)
    return CommandReport(
        title=f"rf-table {result.family}",
        lines=[
            ("kind", result.rf_kind or ""),
            ("rows", str(len(result.table.rows))),
            ("columns", ", ".join(result.table.columns)),
        ],
        artifacts=[reference],
        exit_code=EXIT_OK,
    )


def coeffs_action(
    service: ToolkitService,
    generator: str,
    order: int,
    output: Optional[str],
    output_format: OutputFormat
) -> CommandReport:
    """Action to expand a Lagrange generator and compare both ρ routes."""
    logger.info(f"coeffs for generator {generator}")
    result = service.series_coeffs(generator, order)
    if not result.success:
        return _failure(f"coeffs {generator}", result)

    reference = _write(service, output or f"coeffs-{slug(generator)}", result.table, output_format)
    return CommandReport(
        title=f"coeffs {generator}",
        lines=[("order", str(order)), ("max residual", f"{result.max_residual:.3e}")],
        artifacts=[reference],
        exit_code=EXIT_OK,
    )
