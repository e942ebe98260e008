from abc import ABC, abstractmethod
from typing import Optional

from pydantic import BaseModel, Field

from nef_toolkit.errors import NefToolkitError
from nef_toolkit.infrastructure.logging import get_logger
from nef_toolkit.latent import ExperimentConfig, ExperimentSummary, run_experiment, summarize
from nef_toolkit.reduction.validation import build_reduction_function
from nef_toolkit.services.storage import ArtifactStorageService

from ...models import ArtifactSet, HandlerOutcome, slug


RESULT_COLUMNS = ["replicate", "k", "distance", "distance_unadjusted", "max_dk_error"]


class RunSimulationCommand(BaseModel):
    """Command to run a latent experiment ladder."""

    config: ExperimentConfig = Field(default_factory=ExperimentConfig, description="Experiment settings")
    keep_details: bool = Field(True, description="Also write per-run Gram matrices and estimates")

    class Config:
        json_schema_extra = {
            "example": {
                "config": {
                    "family": "poisson",
                    "n": 10,
                    "r": 2,
                    "k_ladder": [200, 2000, 20000],
                    "replicates": 20,
                    "seed": 0,
                    "output": None
                },
                "keep_details": True
            }
        }


class RunSimulationResult(HandlerOutcome):
    """Result of a latent experiment."""

    summary: Optional[ExperimentSummary] = None
    artifacts: ArtifactSet = Field(default_factory=ArtifactSet)


class RunSimulationHandler(ABC):
    """Abstract handler for latent experiments."""

    @abstractmethod
    def handle(self, command: RunSimulationCommand) -> RunSimulationResult:
        """Handle the run simulation command."""
        pass


class RunSimulationHandlerImpl(RunSimulationHandler):
    """Implementation of run simulation handler."""

    def __init__(self, storage_service: ArtifactStorageService):
        """Initialize the handler with dependencies."""
        self.storage_service = storage_service
        self.logger = get_logger(__name__)

    def handle(self, command: RunSimulationCommand) -> RunSimulationResult:
        """Handle the run simulation command."""
        config = command.config
        try:
            self.logger.debug(f"Running latent experiment for {config.family}")

            _, rf = build_reduction_function(config.family)
            run = run_experiment(config, rf)
            summary = summarize(run)

            prefix = config.output or f"latent-{slug(config.family)}"
            table_ref = self.storage_service.write_table(prefix, run.rows(), RESULT_COLUMNS)
            report_ref = self.storage_service.write_json(f"{prefix}-summary", {
                "config": config.model_dump(mode="json"),
                "summary": summary.model_dump(mode="json"),
            })
            details_ref = self.storage_service.write_json(f"{prefix}-runs", run) if command.keep_details else None

            if run.errors:
                self.logger.warning(f"Latent experiment finished with {len(run.errors)} failed replicates")
            else:
                self.logger.info(f"Latent experiment finished, decreasing = {summary.decreasing}")

            return RunSimulationResult(
                success=True,
                summary=summary,
                artifacts=ArtifactSet(table=table_ref, report=report_ref, details=details_ref),
            )

        except (NefToolkitError, ValueError) as e:
            error_msg = f"Latent experiment failed: {e}"
            self.logger.warning(error_msg)
            return RunSimulationResult.failed(e, error_msg)

        except Exception as e:
            error_msg = f"Latent experiment failed: {str(e)}"
            self.logger.exception(error_msg)
            return RunSimulationResult.failed(e, error_msg)
