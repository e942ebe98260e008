from typing import List, Optional, Tuple

from pydantic import ValidationError

from nef_toolkit.infrastructure.logging import get_logger
from nef_toolkit.latent import ExperimentConfig
from nef_toolkit.reduction.validation import PROBES
from nef_toolkit.residue.verify import CONTOUR_TOL
from nef_toolkit.services.storage import ArtifactStorageService, get_storage_service

from .commands.run_simulation import RunSimulationCommand, RunSimulationHandler, RunSimulationHandlerImpl, RunSimulationResult
from .commands.scan_conjecture import ScanConjectureCommand, ScanConjectureHandler, ScanConjectureHandlerImpl, ScanConjectureResult
from .commands.validate_family import ValidateFamilyCommand, ValidateFamilyHandler, ValidateFamilyHandlerImpl, ValidateFamilyResult
from .queries.rf_table import RfTableHandler, RfTableHandlerImpl, RfTableQuery, RfTableResult
from .queries.series_coeffs import SeriesCoeffsHandler, SeriesCoeffsHandlerImpl, SeriesCoeffsQuery, SeriesCoeffsResult


class ToolkitService:
    """Service for the toolkit operations using CQRS pattern with dependency injection."""

    def __init__(
        self,
        validate_family_handler: Optional[ValidateFamilyHandler] = None,
        scan_conjecture_handler: Optional[ScanConjectureHandler] = None,
        run_simulation_handler: Optional[RunSimulationHandler] = None,
        rf_table_handler: Optional[RfTableHandler] = None,
        series_coeffs_handler: Optional[SeriesCoeffsHandler] = None,
        storage_service: Optional[ArtifactStorageService] = None
    ):
        """Initialize the service with dependency injection.

        Args:
            validate_family_handler: Handler for validation commands
            scan_conjecture_handler: Handler for conjecture scan commands
            run_simulation_handler: Handler for latent experiment commands
            rf_table_handler: Handler for reduction function table queries
            series_coeffs_handler: Handler for generator coefficient queries
            storage_service: Artifact storage service instance
        """
        self.logger = get_logger(__name__)

        # Use dependency injection with fallback to default implementations
        self._storage_service = storage_service or get_storage_service()
        self._validate_family_handler = validate_family_handler or ValidateFamilyHandlerImpl(self._storage_service)
        self._scan_conjecture_handler = scan_conjecture_handler or ScanConjectureHandlerImpl(self._storage_service)
        self._run_simulation_handler = run_simulation_handler or RunSimulationHandlerImpl(self._storage_service)
        self._rf_table_handler = rf_table_handler or RfTableHandlerImpl()
        self._series_coeffs_handler = series_coeffs_handler or SeriesCoeffsHandlerImpl()

        self.logger.debug("ToolkitService initialized with dependency injection")

    @property
    def storage_service(self) -> ArtifactStorageService:
        return self._storage_service

    def validate_family(
        self,
        family: Optional[str] = None,
        all_families: bool = False,
        tol: Optional[float] = None,
        probes: int = PROBES,
        output: Optional[str] = None
    ) -> ValidateFamilyResult:
        """Run the validation suite.

        Args:
            family: Registry name of a single family
            all_families: Validate every registered family instead
            tol: Override for every check tolerance
            probes: Probe θ values per family
            output: Report artifact name

        Returns:
            ValidateFamilyResult with per-family reports and the exit code
        """
        try:
            command = ValidateFamilyCommand(
                family=family, all_families=all_families, tol=tol, probes=probes, output=output
            )
        except ValidationError as e:
            return ValidateFamilyResult.failed(e, _first_error(e))

        result = self._validate_family_handler.handle(command)

        if not result.success:
            self.logger.warning(f"Validation did not run: {result.error}")
        return result

    def scan_conjecture(
        self,
        n_max: int,
        u1_grid: Optional[List[Tuple[float, float]]] = None,
        a0: float = 1.0,
        tol: float = CONTOUR_TOL,
        mu0: float = 1.0,
        output: Optional[str] = None
    ) -> ScanConjectureResult:
        """Scan the residue sign law for every n ≤ n_max over a grid of u1.

        Args:
            n_max: Largest n scanned
            u1_grid: (Re u1, Im u1) pairs, the default grid when None
            a0: Leading coefficient of the variance function
            tol: Contour quadrature tolerance
            mu0: Mean at which θ0 is evaluated
            output: Artifact name prefix

        Returns:
            ScanConjectureResult with violations and artifact references
        """
        try:
            command = ScanConjectureCommand(n_max=n_max, u1_grid=u1_grid, a0=a0, tol=tol, mu0=mu0, output=output)
        except ValidationError as e:
            return ScanConjectureResult.failed(e, _first_error(e))

        result = self._scan_conjecture_handler.handle(command)

        if not result.success:
            self.logger.warning(f"Conjecture scan did not run: {result.error}")
        return result

    def run_simulation(self, config: ExperimentConfig, keep_details: bool = True) -> RunSimulationResult:
        """Run a latent experiment ladder.

        Args:
            config: Validated experiment settings
            keep_details: Also write per-run Gram matrices and estimates

        Returns:
            RunSimulationResult with the experiment summary
        """
        command = RunSimulationCommand(config=config, keep_details=keep_details)
        result = self._run_simulation_handler.handle(command)

        if not result.success:
            self.logger.warning(f"Latent experiment did not run: {result.error}")
        return result

    def rf_table(
        self,
        family: str,
        n_max: int = 10,
        x_min: Optional[float] = None,
        x_max: float = 5.0,
        points: int = 21
    ) -> RfTableResult:
        """Tabulate φ, with the coefficient pipeline for families on ℕ."""
        try:
            query = RfTableQuery(family=family, n_max=n_max, x_min=x_min, x_max=x_max, points=points)
        except ValidationError as e:
            return RfTableResult.failed(e, _first_error(e), family=family)

        return self._rf_table_handler.handle(query)

    def series_coeffs(self, generator: str, order: int = 20) -> SeriesCoeffsResult:
        """β and ρ by both routes for a named Lagrange generator."""
        try:
            query = SeriesCoeffsQuery(generator=generator, order=order)
        except ValidationError as e:
            return SeriesCoeffsResult.failed(e, _first_error(e), generator=generator)

        return self._series_coeffs_handler.handle(query)


def _first_error(error: ValidationError) -> str:
    details = error.errors()
    if not details:
        return str(error)
    first = details[0]
    location = ".".join(str(part) for part in first.get("loc", ()))
    return f"{location}: {first['msg']}" if location else first["msg"]


# Global service instance for convenience
_toolkit_service: Optional[ToolkitService] = None


def get_toolkit_service() -> ToolkitService:
    """Get the global toolkit service instance."""
    global _toolkit_service

    if _toolkit_service is None:
        _toolkit_service = ToolkitService()

    return _toolkit_service


def reset_toolkit_service() -> None:
    """Reset the global toolkit service instance (useful for testing)."""
    global _toolkit_service
    _toolkit_service = None
