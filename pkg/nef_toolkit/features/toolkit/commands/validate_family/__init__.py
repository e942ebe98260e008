from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Tuple

from joblib import Parallel, delayed
from pydantic import BaseModel, Field, model_validator

from nef_toolkit.errors import EXIT_OK, EXIT_VALIDATION_FAILED, NefToolkitError, UnknownFamily
from nef_toolkit.families import family_names
from nef_toolkit.infrastructure.logging import get_logger
from nef_toolkit.reduction.validation import PROBES, FamilyReport, validate_family
from nef_toolkit.services.storage import ArtifactStorageService
from nef_toolkit.settings import settings

from ...models import ArtifactSet, HandlerOutcome, exit_code_for, slug


# every registry entry at its defaults plus the second PVF case
ALL_FAMILIES = tuple(family_names()) + ("pvf(2.5)",)


class ValidateFamilyCommand(BaseModel):
    """Command to run the validation suite for one family or all of them."""

    family: Optional[str] = Field(None, description="Registry name, e.g. 'negbin(3)'")
    all_families: bool = Field(False, description="Validate every registered family")
    tol: Optional[float] = Field(None, description="Override for every check tolerance", gt=0)
    probes: int = Field(PROBES, description="Probe θ values per family", ge=1)
    output: Optional[str] = Field(None, description="Report artifact name")

    class Config:
        json_schema_extra = {
            "example": {
                "family": "strict-arcsine",
                "all_families": False,
                "tol": None,
                "probes": 10,
                "output": None
            }
        }

    @model_validator(mode="after")
    def _target(self) -> 'ValidateFamilyCommand':
        if (self.family is None) == (not self.all_families):
            raise ValueError("give either a family or all_families, not both")
        return self

    @property
    def families(self) -> Tuple[str, ...]:
        return ALL_FAMILIES if self.all_families else (self.family,)


class FamilyOutcome(BaseModel):
    """One family's report with its pass flag and exit code."""

    report: FamilyReport
    passed: bool
    max_relerr: Optional[float] = None
    exit_code: int = EXIT_OK

    def summary(self) -> Dict[str, Any]:
        failed = [c for c in self.report.checks if not c.passed]
        return {
            "family": self.report.family,
            "passed": self.passed,
            "max_relerr": self.max_relerr,
            "checks": len(self.report.checks),
            "failed": len(failed),
            "error": self.report.error,
        }


class ValidateFamilyResult(HandlerOutcome):
    """Result of a validation run."""

    outcomes: List[FamilyOutcome] = []
    passed: bool = False
    artifacts: ArtifactSet = Field(default_factory=ArtifactSet)


class ValidateFamilyHandler(ABC):
    """Abstract handler for validation runs."""

    @abstractmethod
    def handle(self, command: ValidateFamilyCommand) -> ValidateFamilyResult:
        """Handle the validate family command."""
        pass


class ValidateFamilyHandlerImpl(ValidateFamilyHandler):
    """Implementation of validate family handler."""

    def __init__(self, storage_service: ArtifactStorageService):
        """Initialize the handler with dependencies."""
        self.storage_service = storage_service
        self.logger = get_logger(__name__)

    def _validate_one(self, name: str, tol: Optional[float], probes: int) -> FamilyOutcome:
        try:
            report = validate_family(name, tol=tol, probes=probes)
        except UnknownFamily:
            raise
        except NefToolkitError as e:
            self.logger.warning(f"Validation of {name} stopped: {type(e).__name__}: {e}")
            report = FamilyReport(family=name, error=f"{type(e).__name__}: {e}")
            return FamilyOutcome(report=report, passed=False, exit_code=exit_code_for(e))
        except Exception as e:
            self.logger.exception(f"Validation of {name} crashed")
            report = FamilyReport(family=name, error=f"{type(e).__name__}: {e}")
            return FamilyOutcome(report=report, passed=False, exit_code=exit_code_for(e))
        return FamilyOutcome(
            report=report,
            passed=report.passed,
            max_relerr=report.max_relerr,
            exit_code=EXIT_OK if report.passed else EXIT_VALIDATION_FAILED,
        )

    def handle(self, command: ValidateFamilyCommand) -> ValidateFamilyResult:
        """Handle the validate family command."""
        try:
            self.logger.debug(f"Validating {', '.join(command.families)}")

            outcomes = Parallel(n_jobs=settings.threads, prefer="threads")(
                delayed(self._validate_one)(name, command.tol, command.probes) for name in command.families
            )

            passed = all(outcome.passed for outcome in outcomes)
            name = command.output or f"validate-{slug(command.family) if command.family else 'all'}"
            payload = {
                "passed": passed,
                "tolerance_override": command.tol,
                "summary": [outcome.summary() for outcome in outcomes],
                "families": [
                    {**outcome.report.model_dump(mode="json"), "passed": outcome.passed, "max_relerr": outcome.max_relerr}
                    for outcome in outcomes
                ],
            }
            report_ref = self.storage_service.write_json(name, payload)

            exit_code = max(outcome.exit_code for outcome in outcomes)
            if passed:
                self.logger.info(f"Validation passed for {len(outcomes)} families")
            else:
                failed = [outcome.report.family for outcome in outcomes if not outcome.passed]
                self.logger.warning(f"Validation failed for {', '.join(failed)}")

            return ValidateFamilyResult(
                success=True,
                exit_code=exit_code,
                outcomes=outcomes,
                passed=passed,
                artifacts=ArtifactSet(report=report_ref),
            )

        except (NefToolkitError, ValueError) as e:
            error_msg = f"Validation failed: {e}"
            self.logger.warning(error_msg)
            return ValidateFamilyResult.failed(e, error_msg)

        except Exception as e:
            error_msg = f"Validation failed: {str(e)}"
            self.logger.exception(error_msg)
            return ValidateFamilyResult.failed(e, error_msg)
