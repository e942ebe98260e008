from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from nef_toolkit.errors import EXIT_USAGE
from nef_toolkit.features.toolkit.service import ToolkitService
from nef_toolkit.infrastructure.logging import get_logger
from ..dto import CommandReport, SimulateOverrides


logger = get_logger(__name__)


def simulate_action(
    service: ToolkitService,
    config_file: Optional[Path],
    overrides: SimulateOverrides,
    keep_details: bool
) -> CommandReport:
    """
    Action to run the latent experiment ladder.

    Args:
        service: Toolkit service instance
        config_file: Optional ``key = value`` experiment file
        overrides: Flags that replace config file values
        keep_details: Also write per-run Gram matrices and estimates

    Returns:
        CommandReport for stdout
    """
    if config_file is not None and not config_file.is_file():
        logger.warning(f"Config file not found: {config_file}")
        return CommandReport(title="simulate", lines=[("error", f"config file not found: {config_file}")], exit_code=EXIT_USAGE)

    try:
        config = overrides.apply(config_file)
    except (ValidationError, ValueError) as e:
        logger.warning(f"Invalid experiment config: {e}")
        return CommandReport(title="simulate", lines=[("error", str(e))], exit_code=EXIT_USAGE)

    logger.info(f"simulate {config.family}, ladder {config.k_ladder}, {config.replicates} replicates")
    result = service.run_simulation(config, keep_details)

    if not result.success:
        return CommandReport(
            title=f"simulate {config.family}",
            lines=[("error", f"{result.error_type}: {result.error}")],
            exit_code=result.exit_code,
        )

    summary = result.summary
    lines = [
        (f"k = {rung.k}", f"median distance {rung.median_distance:.4f} (unadjusted {rung.median_distance_unadjusted:.4f}), "
                          f"adjusted wins {rung.adjusted_win_rate:.0%}")
        for rung in summary.rungs
    ]
    lines.append(("decreasing", "yes" if summary.decreasing else "no"))
    lines.append(("adjusted win rate at largest k", f"{summary.adjusted_win_rate:.0%}"))
    if summary.note:
        lines.append(("note", summary.note))
    if summary.errors:
        lines.append(("failed replicates", str(len(summary.errors))))

    return CommandReport(
        title=f"simulate {config.family}",
        lines=lines,
        artifacts=[str(reference) for reference in result.artifacts.references()],
        exit_code=result.exit_code,
    )
