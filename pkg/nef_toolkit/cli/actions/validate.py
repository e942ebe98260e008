from typing import Optional

from nef_toolkit.features.toolkit.service import ToolkitService
from nef_toolkit.infrastructure.logging import get_logger
from ..dto import CommandReport


logger = get_logger(__name__)


def validate_action(
    service: ToolkitService,
    family: Optional[str],
    all_families: bool,
    tol: Optional[float],
    probes: int,
    output: Optional[str]
) -> CommandReport:
    """
    Action to run the validation suite and report PASS/FAIL per family.

    Args:
        service: Toolkit service instance
        family: Registry name of a single family
        all_families: Validate every registered family
        tol: Override for every check tolerance
        probes: Probe θ values per family
        output: Report artifact name

    Returns:
        CommandReport for stdout
    """
    target = "all" if all_families else family
    logger.info(f"validate {target}")
    result = service.validate_family(family, all_families, tol, probes, output)

    if not result.success:
        return CommandReport(
            title=f"validate {target}",
            lines=[("error", f"{result.error_type}: {result.error}")],
            exit_code=result.exit_code,
        )

    lines = []
    for outcome in result.outcomes:
        status = "PASS" if outcome.passed else "FAIL"
        detail = f"max relerr {outcome.max_relerr:.2e}" if outcome.max_relerr is not None else ""
        if outcome.report.error:
            detail = outcome.report.error
        else:
            failed = [check for check in outcome.report.checks if not check.passed]
            if failed:
                worst = max(failed, key=lambda check: check.relerr)
                detail += f"; {len(failed)} failed, worst {worst.check} relerr {worst.relerr:.2e} > {worst.tolerance:.1e}"
        lines.append((outcome.report.family, f"{status} {detail}".strip()))
    lines.append(("overall", "PASS" if result.passed else "FAIL"))

    return CommandReport(
        title=f"validate {target}",
        lines=lines,
        artifacts=[str(reference) for reference in result.artifacts.references()],
        exit_code=result.exit_code,
    )
