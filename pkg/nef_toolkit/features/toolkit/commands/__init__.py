from .validate_family import ValidateFamilyCommand, ValidateFamilyResult, ValidateFamilyHandler, ValidateFamilyHandlerImpl
from .scan_conjecture import ScanConjectureCommand, ScanConjectureResult, ScanConjectureHandler, ScanConjectureHandlerImpl
from .run_simulation import RunSimulationCommand, RunSimulationResult, RunSimulationHandler, RunSimulationHandlerImpl

__all__ = [
    'ValidateFamilyCommand', 'ValidateFamilyResult', 'ValidateFamilyHandler', 'ValidateFamilyHandlerImpl',
    'ScanConjectureCommand', 'ScanConjectureResult', 'ScanConjectureHandler', 'ScanConjectureHandlerImpl',
    'RunSimulationCommand', 'RunSimulationResult', 'RunSimulationHandler', 'RunSimulationHandlerImpl'
]
