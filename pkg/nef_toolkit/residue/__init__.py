from .verify import (
    DEFAULT_GRID,
    ConjectureScan,
    ConjectureVf,
    NecessityReport,
    ScanCell,
    TauMethod,
    TauResult,
    classify_sign,
    conjecture_scan,
    contour_tau,
    necessity_predicate,
    residue_series,
    theta0,
)

__all__ = [
    'DEFAULT_GRID', 'ConjectureScan', 'ConjectureVf', 'NecessityReport', 'ScanCell',
    'TauMethod', 'TauResult', 'classify_sign', 'conjecture_scan', 'contour_tau',
    'necessity_predicate', 'residue_series', 'theta0',
]
