from abc import ABC, abstractmethod
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field

from nef_toolkit.errors import EXIT_OK, EXIT_VALIDATION_FAILED, NefToolkitError
from nef_toolkit.infrastructure.logging import get_logger
from nef_toolkit.residue import ConjectureVf, NecessityReport, ScanCell, conjecture_scan, necessity_predicate
from nef_toolkit.residue.verify import CONTOUR_TOL
from nef_toolkit.services.storage import ArtifactStorageService

from ...models import ArtifactSet, HandlerOutcome


SCAN_COLUMNS = ["n", "re_u1", "im_u1", "re_tau", "im_tau", "d", "method_gap", "verdict"]


class ScanConjectureCommand(BaseModel):
    """Command to scan the residue sign law over n and a grid of u1."""

    n_max: int = Field(..., description="Largest n scanned", ge=1)
    u1_grid: Optional[List[Tuple[float, float]]] = Field(
        None, description="(Re u1, Im u1) pairs; the default 15-point grid when omitted"
    )
    a0: float = Field(1.0, description="Leading coefficient of the variance function", gt=0)
    tol: float = Field(CONTOUR_TOL, description="Contour quadrature tolerance", gt=0)
    mu0: float = Field(1.0, description="Mean at which θ0 is evaluated", gt=0)
    output: Optional[str] = Field(None, description="Artifact name prefix")

    class Config:
        json_schema_extra = {
            "example": {
                "n_max": 25,
                "u1_grid": None,
                "a0": 1.0,
                "tol": 1e-9,
                "mu0": 1.0,
                "output": "conjecture-n25"
            }
        }


class ScanConjectureResult(HandlerOutcome):
    """Result of a conjecture scan."""

    cells: int = 0
    violations: List[ScanCell] = []
    vf_impossible: int = 0
    artifacts: ArtifactSet = Field(default_factory=ArtifactSet)

    @property
    def passed(self) -> bool:
        return self.success and not self.violations


class ScanConjectureHandler(ABC):
    """Abstract handler for conjecture scans."""

    @abstractmethod
    def handle(self, command: ScanConjectureCommand) -> ScanConjectureResult:
        """Handle the scan conjecture command."""
        pass


class ScanConjectureHandlerImpl(ScanConjectureHandler):
    """Implementation of scan conjecture handler."""

    def __init__(self, storage_service: ArtifactStorageService):
        """Initialize the handler with dependencies."""
        self.storage_service = storage_service
        self.logger = get_logger(__name__)

    def _necessity(self, cell: ScanCell, command: ScanConjectureCommand) -> Optional[NecessityReport]:
        vf = ConjectureVf(command.a0, complex(cell.u1_re, cell.u1_im), cell.n)
        try:
            return necessity_predicate(vf, command.mu0)
        except NefToolkitError as e:
            self.logger.warning(f"No necessity verdict for n = {cell.n}, u1 = {vf.u1}: {e}")
            return None

    def handle(self, command: ScanConjectureCommand) -> ScanConjectureResult:
        """Handle the scan conjecture command."""
        try:
            grid = [complex(re, im) for re, im in command.u1_grid] if command.u1_grid else None
            self.logger.debug(f"Scanning conjecture to n = {command.n_max}")

            scan = conjecture_scan(command.n_max, grid, a0=command.a0, tol=command.tol)
            predicates = [report for report in (self._necessity(cell, command) for cell in scan.cells) if report]

            prefix = command.output or f"conjecture-n{command.n_max}"
            table_ref = self.storage_service.write_table(prefix, scan.rows(), SCAN_COLUMNS)
            report_ref = self.storage_service.write_json(f"{prefix}-report", {
                "n_max": scan.n_max,
                "a0": scan.a0,
                "cells": len(scan.cells),
                "passed": scan.passed,
                "violations": [cell.model_dump(mode="json") for cell in scan.violations],
                "necessity": [report.model_dump(mode="json") for report in predicates],
            })

            impossible = sum(1 for report in predicates if report.vf_impossible)
            if scan.passed:
                self.logger.info(f"Conjecture scan passed: {len(scan.cells)} cells, {impossible} VF-impossible")
            else:
                self.logger.warning(f"Conjecture scan found {len(scan.violations)} violations")

            return ScanConjectureResult(
                success=True,
                exit_code=EXIT_OK if scan.passed else EXIT_VALIDATION_FAILED,
                cells=len(scan.cells),
                violations=scan.violations,
                vf_impossible=impossible,
                artifacts=ArtifactSet(table=table_ref, report=report_ref),
            )

        except (NefToolkitError, ValueError) as e:
            error_msg = f"Conjecture scan failed: {e}"
            self.logger.warning(error_msg)
            return ScanConjectureResult.failed(e, error_msg)

        except Exception as e:
            error_msg = f"Conjecture scan failed: {str(e)}"
            self.logger.exception(error_msg)
            return ScanConjectureResult.failed(e, error_msg)
