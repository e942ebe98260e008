from typing import Optional

from nef_toolkit.features.toolkit.service import ToolkitService
from nef_toolkit.infrastructure.logging import get_logger
from ..dto import CommandReport, parse_grid


logger = get_logger(__name__)

SHOWN_VIOLATIONS = 10


def conjecture_action(
    service: ToolkitService,
    n_max: int,
    grid: str,
    a0: float,
    tol: float,
    mu0: float,
    output: Optional[str]
) -> CommandReport:
    """
    Action to scan the residue sign law and write the scan table.

    Args:
        service: Toolkit service instance
        n_max: Largest n scanned
        grid: ``default`` or ``;``-separated complex literals
        a0: Leading coefficient of the variance function
        tol: Contour quadrature tolerance
        mu0: Mean at which θ0 is evaluated
        output: Artifact name prefix

    Returns:
        CommandReport for stdout

    Raises:
        ValueError: If the grid specification cannot be parsed
    """
    logger.info(f"conjecture scan to n = {n_max}")
    result = service.scan_conjecture(n_max, parse_grid(grid), a0=a0, tol=tol, mu0=mu0, output=output)

    if not result.success:
        return CommandReport(
            title=f"conjecture n ≤ {n_max}",
            lines=[("error", f"{result.error_type}: {result.error}")],
            exit_code=result.exit_code,
        )

    lines = [
        ("cells", str(result.cells)),
        ("violations", str(len(result.violations))),
        ("vf-impossible verdicts", f"{result.vf_impossible} of {result.cells}"),
    ]
    for cell in result.violations[:SHOWN_VIOLATIONS]:
        lines.append((f"n = {cell.n}, u1 = {complex(cell.u1_re, cell.u1_im)}", "; ".join(cell.violations)))

    return CommandReport(
        title=f"conjecture n ≤ {n_max}",
        lines=lines,
        artifacts=[str(reference) for reference in result.artifacts.references()],
        exit_code=result.exit_code,
    )
