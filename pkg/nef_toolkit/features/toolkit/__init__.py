from .service import ToolkitService, get_toolkit_service, reset_toolkit_service
from .commands import (
    RunSimulationCommand, RunSimulationResult, ScanConjectureCommand, ScanConjectureResult,
    ValidateFamilyCommand, ValidateFamilyResult
)
from .queries import RfTableQuery, RfTableResult, SeriesCoeffsQuery, SeriesCoeffsResult

__all__ = [
    'ToolkitService', 'get_toolkit_service', 'reset_toolkit_service',
    'RunSimulationCommand', 'RunSimulationResult', 'ScanConjectureCommand', 'ScanConjectureResult',
    'ValidateFamilyCommand', 'ValidateFamilyResult',
    'RfTableQuery', 'RfTableResult', 'SeriesCoeffsQuery', 'SeriesCoeffsResult'
]
