from .nef import AtomicNef, BasisKind, DensityNef, Nef, ThetaInterval, probe_grid
from .series import (
    TruncatedSeries,
    cauchy_product,
    compose,
    exp_series,
    lagrange_invert,
    log_series,
    make_context,
    power,
    reciprocal,
)

__all__ = [
    'AtomicNef', 'BasisKind', 'DensityNef', 'Nef', 'ThetaInterval', 'probe_grid',
    'TruncatedSeries', 'cauchy_product', 'compose', 'exp_series', 'lagrange_invert',
    'log_series', 'make_context', 'power', 'reciprocal',
]
