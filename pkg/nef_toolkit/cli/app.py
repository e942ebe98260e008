from pathlib import Path
from typing import Callable, Optional

import typer
from rich.console import Console
from rich.table import Table

from nef_toolkit.errors import EXIT_USAGE
from nef_toolkit.features.toolkit.service import ToolkitService, get_toolkit_service
from nef_toolkit.infrastructure.logging import get_logger
from nef_toolkit.reduction.validation import PROBES
from nef_toolkit.residue.verify import CONTOUR_TOL
from nef_toolkit.services.storage import ArtifactStorageService
from .actions import coeffs_action, conjecture_action, rf_table_action, simulate_action, validate_action
from .dto import CommandReport, OutputFormat, SimulateOverrides, parse_k_ladder


logger = get_logger(__name__)
console = Console()

app = typer.Typer(
    name="nef-toolkit",
    help="Reduction functions, residue checks and latent experiments for natural exponential families.",
    no_args_is_help=True,
    add_completion=False,
)


@app.callback()
def main(
    ctx: typer.Context,
    output_dir: Optional[Path] = typer.Option(
        None, "--output-dir", help="Artifact directory (default: NEF_TOOLKIT_OUTPUT_DIR or ./results)"
    ),
) -> None:
    """Every subcommand writes CSV/JSON artifacts and prints a summary to stdout."""
    storage = ArtifactStorageService.at(str(output_dir)) if output_dir is not None else None
    ctx.obj = ToolkitService(storage_service=storage) if storage is not None else get_toolkit_service()


def _render(report: CommandReport) -> None:
    console.print(f"[bold]{report.title}[/bold]")
    if report.lines:
        table = Table(show_header=False, box=None, pad_edge=False)
        table.add_column(style="cyan", no_wrap=True)
        table.add_column()
        for key, value in report.lines:
            table.add_row(key, value)
        console.print(table)
    for artifact in report.artifacts:
        console.print(f"wrote {artifact}")


def _run(action: Callable[[], CommandReport]) -> None:
    try:
        report = action()
    except ValueError as e:
        logger.warning(f"Usage error: {e}")
        report = CommandReport(title="usage error", lines=[("error", str(e))], exit_code=EXIT_USAGE)
    _render(report)
    raise typer.Exit(code=report.exit_code)


@app.command("rf-table")
def rf_table(
    ctx: typer.Context,
    family: str = typer.Option(..., "--family", "-f", help="Registry name, e.g. poisson, negbin(3), pvf(2.5)"),
    n_max: int = typer.Option(10, "--n-max", min=0, help="Largest atom for families on ℕ"),
    x_min: Optional[float] = typer.Option(None, "--x-min", help="Grid start for continuous families"),
    x_max: float = typer.Option(5.0, "--x-max", help="Grid end for continuous families"),
    points: int = typer.Option(21, "--points", min=2, help="Grid size for continuous families"),
    output: Optional[str] = typer.Option(None, "--output", "-o", help="Artifact name"),
    output_format: OutputFormat = typer.Option(OutputFormat.CSV, "--format", help="Artifact format"),
) -> None:
    """Tabulate (x, φ(x)) plus the β, c, ρ, α pipeline columns for families on ℕ."""
    _run(lambda: rf_table_action(ctx.obj, family, n_max, x_min, x_max, points, output, output_format))


@app.command("coeffs")
def coeffs(
    ctx: typer.Context,
    generator: str = typer.Option("exp", "--generator", "-g", help="exp, geometric, exp-arcsin or one-plus"),
    order: int = typer.Option(20, "--order", min=1, max=200, help="Largest n"),
    output: Optional[str] = typer.Option(None, "--output", "-o", help="Artifact name"),
    output_format: OutputFormat = typer.Option(OutputFormat.CSV, "--format", help="Artifact format"),
) -> None:
    """β and ρ of a Lagrange generator family by both routes, with their residual."""
    _run(lambda: coeffs_action(ctx.obj, generator, order, output, output_format))


@app.command("validate")
def validate(
    ctx: typer.Context,
    family: Optional[str] = typer.Option(None, "--family", "-f", help="Registry name of one family"),
    all_families: bool = typer.Option(False, "--all", help="Validate every registered family"),
    tol: Optional[float] = typer.Option(None, "--tol", help="Override every check tolerance"),
    probes: int = typer.Option(PROBES, "--probes", min=1, help="Probe θ values per family"),
    output: Optional[str] = typer.Option(None, "--output", "-o", help="Report artifact name"),
) -> None:
    """Master identity, VF certification and oracle checks; exit 0 iff every check passes."""
    _run(lambda: validate_action(ctx.obj, family, all_families, tol, probes, output))


@app.command("conjecture")
def conjecture(
    ctx: typer.Context,
    n_max: int = typer.Option(..., "--n-max", min=1, help="Largest n scanned"),
    grid: str = typer.Option("default", "--grid", help="'default' or ';'-separated u1 values, e.g. '0.3+1j;-2+0.5j'"),
    a0: float = typer.Option(1.0, "--a0", help="Leading coefficient of the variance function"),
    tol: float = typer.Option(CONTOUR_TOL, "--tol", help="Contour quadrature tolerance"),
    mu0: float = typer.Option(1.0, "--mu0", help="Mean at which θ0 is evaluated"),
    output: Optional[str] = typer.Option(None, "--output", "-o", help="Artifact name prefix"),
) -> None:
    """Scan the residue sign law over n ≤ n_max and a u1 grid; exit 1 on any violation."""
    _run(lambda: conjecture_action(ctx.obj, n_max, grid, a0, tol, mu0, output))


@app.command("simulate")
def simulate(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="key = value experiment file"),
    family: Optional[str] = typer.Option(None, "--family", "-f", help="Registry name (default poisson)"),
    n: Optional[int] = typer.Option(None, "--n", help="Number of columns (default 10)"),
    r: Optional[int] = typer.Option(None, "--r", help="Latent rank (default 2)"),
    k_ladder: Optional[str] = typer.Option(None, "--k-ladder", help="Comma separated row counts (default 200,2000,20000)"),
    replicates: Optional[int] = typer.Option(None, "--replicates", help="Seeded replicates (default 20)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Base seed (default 0)"),
    output: Optional[str] = typer.Option(None, "--output", "-o", help="Artifact name prefix"),
    details: bool = typer.Option(True, "--details/--no-details", help="Write per-run Gram matrices and estimates"),
) -> None:
    """Latent row-space recovery along the k ladder, adjusted against unadjusted Gram matrices."""
    def action() -> CommandReport:
        overrides = SimulateOverrides(
            family=family, n=n, r=r, k_ladder=parse_k_ladder(k_ladder),
            replicates=replicates, seed=seed, output=output,
        )
        return simulate_action(ctx.obj, config, overrides, details)

    _run(action)
